"""Convolution kernel of the differential transform, its Fourier multiplier,
and the contour identity behind the multiplier formula.

    K_N(s) = 1/(4^a Gamma(a)) sum_{j=N1}^{N2} v_j (L(a_{j+1}, s) - L(a_j, s)),
    L(tau, s) = tau^(2a) exp(-tau^2/(4s)) s^(-1-a)

    m(x)   = 1/Gamma(a) int_0^inf exp(-r) exp(-i x/(4r)) r^(a-1) dr
    m_N(f) = sum_j v_j (m(a_{j+1}^2 f) - m(a_j^2 f))
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._validation import check_alpha
from .lacunary import LacunarySpec, WindowPair, _as_window, window_indices
from .quad import QuadConfig, integrate_halfline

__all__ = [
    "KernelEval",
    "MultiplierEval",
    "kernel_value",
    "kernel_dvalue",
    "bound_sweep",
    "default_s_grid",
    "multiplier_m",
    "multiplier_m_many",
    "multiplier_TN",
    "multiplier_sweep",
    "frequency_grid",
    "lemma21_check",
    "write_bound_rows",
    "write_multiplier_rows",
]


@dataclass(frozen=True)
class KernelEval:
    spec: LacunarySpec
    N: WindowPair
    alpha: float

    def __post_init__(self):
        check_alpha(self.alpha)
        object.__setattr__(self, "N", _as_window(self.N))
        window_indices(self.spec, self.N)

    def terms(self):
        """(v_j, a_j, a_{j+1}) over the window."""
        js = np.arange(self.N.N1, self.N.N2 + 1) - self.spec.j_min
        return self.spec.v[js], self.spec.a[js], self.spec.a[js + 1]

    @property
    def log_norm(self):
        return self.alpha * math.log(4.0) + special.gammaln(self.alpha)


MultiplierEval = KernelEval


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise ValueError("the kernel is evaluated at s > 0 only")
    return s


def _sorted_sum(terms):
    """Sum along the last axis from largest to smallest magnitude."""
    order = np.argsort(-np.abs(terms), axis=-1, kind="stable")
    return np.sum(np.take_along_axis(terms, order, axis=-1), axis=-1)


def _layer_terms(ke, s, deriv):
    v, lo, hi = ke.terms()
    a = ke.alpha
    s = s[..., None]

    def layer(tau):
        val = np.exp(2 * a * np.log(tau) - tau * tau / (4.0 * s) - (1.0 + a) * np.log(s) - ke.log_norm)
        if deriv:
            val = val * (tau * tau / (4.0 * s * s) - (1.0 + a) / s)
        return val

    return np.concatenate([v * layer(hi), -v * layer(lo)], axis=-1)


def kernel_value(ke: KernelEval, s):
    """K_N(s) for s > 0 (scalar or array)."""
    s = _check_s(s)
    out = _sorted_sum(_layer_terms(ke, s, deriv=False))
    return float(out) if out.ndim == 0 else out


def kernel_dvalue(ke: KernelEval, s):
    """d/ds K_N(s), summing the closed-form derivative of each layer."""
    s = _check_s(s)
    out = _sorted_sum(_layer_terms(ke, s, deriv=True))
    return float(out) if out.ndim == 0 else out


def default_s_grid(ke: KernelEval, per_decade: int = 64):
    lo = ke.spec.a_at(ke.N.N1) ** 2 * 1e-3
    hi = ke.spec.a_at(ke.N.N2 + 1) ** 2 * 1e3
    n = int(math.ceil(per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, n)


def bound_sweep(ke: KernelEval, s_grid=None, chunk: int = 4096):
    """(sup s |K_N(s)|, sup s^2 |K_N'(s)|) over a geometric s grid."""
    s_grid = default_s_grid(ke) if s_grid is None else np.asarray(s_grid, dtype=float)
    sup_k = sup_dk = 0.0
    for i in range(0, s_grid.size, chunk):
        s = s_grid[i : i + chunk]
        sup_k = max(sup_k, float(np.max(s * np.abs(kernel_value(ke, s)))))
        sup_dk = max(sup_dk, float(np.max(s * s * np.abs(kernel_dvalue(ke, s)))))
    return sup_k, sup_dk


# --- Fourier multiplier --------------------------------------------------


def multiplier_m(alpha: float, x: float, cfg: QuadConfig | None = None) -> complex:
    """m(x) by quadrature along the ray r = rho exp(i sign(x) pi/4).

    On that ray both factors decay exponentially (at 0 and at infinity),
    and Cauchy's theorem moves the real-axis integral onto it.
    """
    alpha = check_alpha(alpha)
    x = float(x)
    if x == 0.0:
        return 1.0 + 0.0j
    cfg = cfg or QuadConfig()
    e = cmath.exp(1j * math.copysign(math.pi / 4, x))
    lg = special.gammaln(alpha)

    def g(r):
        return np.exp(-r * e - 1j * x / (4.0 * r * e) + (alpha - 1.0) * np.log(r) - lg)

    pivot = max(1.0, math.sqrt(abs(x)) / 2.0)
    res = integrate_halfline(g, QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions, (), pivot))
    return complex(e**alpha * res.value)


def multiplier_m_many(alpha: float, xs, cfg=None, merge_rtol: float = 1e-12):
    """m on an array, evaluating each distinct argument once.

    Arguments that agree to ``merge_rtol`` (products like a_j^2 * freq that
    land on the same point of a log grid up to rounding) share one
    evaluation; the induced change is below |x m'(x)| * merge_rtol.
    """
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    order = np.argsort(flat, kind="stable")
    sx = flat[order]
    new_group = np.ones(sx.size, dtype=bool)
    new_group[1:] = np.abs(np.diff(sx)) > merge_rtol * np.maximum(np.abs(sx[1:]), np.abs(sx[:-1]))
    reps = sx[new_group]
    vals = np.array([multiplier_m(alpha, x, cfg) for x in reps], dtype=complex)
    out = np.empty(flat.size, dtype=complex)
    out[order] = vals[np.cumsum(new_group) - 1]
    return out.reshape(xs.shape)


def frequency_grid(spec: LacunarySpec, M: int, steps_per_ratio: int = 240, margin: float = 1e4):
    """Log grid over [1/(margin a_{M+1}^2), margin / a_{-M}^2].

    The grid ratio is (a_1/a_0)^(2/steps_per_ratio), so for geometric
    sequences every a_j^2 * freq falls back on the same grid.
    """
    lo = 1.0 / (margin * spec.a_at(M + 1) ** 2)
    hi = margin / spec.a_at(-M) ** 2
    step = 2.0 * math.log(spec.a_at(1) / spec.a_at(0)) / steps_per_ratio
    n = int(math.ceil(math.log(hi / lo) / step))
    return lo * np.exp(step * np.arange(n + 1))


def multiplier_TN(me: MultiplierEval, rho_freq, cfg=None):
    """m_N at one frequency or an array of frequencies."""
    freqs = np.atleast_1d(np.asarray(rho_freq, dtype=float))
    v, lo, hi = me.terms()
    m_hi = multiplier_m_many(me.alpha, np.outer(freqs, hi * hi), cfg)
    m_lo = multiplier_m_many(me.alpha, np.outer(freqs, lo * lo), cfg)
    out = (m_hi - m_lo) @ v
    return complex(out[0]) if np.ndim(rho_freq) == 0 else out


def multiplier_sweep(spec: LacunarySpec, alpha, Ms, freqs, cfg=None):
    """m_{(-M, M)} on a frequency grid for each M, sharing the m evaluations.

    Returns {M: complex array over freqs}.
    """
    freqs = np.asarray(freqs, dtype=float)
    Mmax = max(Ms)
    js = np.arange(-Mmax, Mmax + 2)
    a = np.array([spec.a_at(int(j)) for j in js])
    m_vals = multiplier_m_many(alpha, np.outer(freqs, a * a), cfg)
    out = {}
    for M in Ms:
        idx = np.arange(-M, M + 1)
        v = np.array([spec.v_at(int(j)) for j in idx])
        cols = idx + Mmax
        out[M] = (m_vals[:, cols + 1] - m_vals[:, cols]) @ v
    return out


# --- contour identity ----------------------------------------------------


def lemma21_check(alpha: float, z0: complex, cfg: QuadConfig | None = None):
    """Both sides of

        int_0^inf e^(-z0 u) e^(-z0/u) u^(-a) du = z0^(1-a) int_0^inf e^(-r) e^(-z0^2/r) r^(a-2) dr

    for Re z0 > 0, |arg z0| <= pi/4, each by its own quadrature.  Returns
    (lhs, rhs, |lhs - rhs|).

    When z0^2 sits on or near the imaginary axis the right-hand integrand
    only oscillates as r -> 0.  With w = 1/r it becomes
    int e^(-1/w) e^(-z0^2 w) w^(-a) dw, and turning the w-ray by pi/8
    against arg z0 restores exponential decay at both ends.
    """
    alpha = check_alpha(alpha)
    z0 = complex(z0)
    theta = cmath.phase(z0)
    if not (z0.real > 0 and abs(theta) <= math.pi / 4 + 1e-12):
        raise ValueError("z0 must satisfy Re z0 > 0 and |arg z0| <= pi/4")
    cfg = cfg or QuadConfig(rel_tol=1e-11, abs_tol=1e-300)
    a = alpha

    lhs = integrate_halfline(
        lambda u: np.exp(-z0 * u - z0 / u - a * np.log(u)),
        QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions, (), 1.0),
    ).value

    z2 = z0 * z0
    if math.cos(2 * theta) > 0.5:
        integral = integrate_halfline(
            lambda r: np.exp(-r - z2 / r + (a - 2.0) * np.log(r)),
            QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions, (), max(1.0, abs(z0))),
        ).value
    else:
        e = cmath.exp(-1j * math.copysign(math.pi / 8, theta))
        integral = e ** (1.0 - a) * integrate_halfline(
            lambda rho: np.exp(-1.0 / (rho * e) - z2 * rho * e - a * np.log(rho)),
            QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions, (), 1.0 / max(1.0, abs(z0))),
        ).value
    rhs = z0 ** (1.0 - a) * integral
    return complex(lhs), complex(rhs), abs(lhs - rhs)


# --- CSV rows ------------------------------------------------------------

BOUND_HEADER = ["M", "alpha", "rho", "sup_sK", "sup_s2dK"]
MULTIPLIER_HEADER = ["M", "alpha", "freq", "re_m", "im_m", "abs_m"]


def write_bound_rows(path, rows):
    """rows: iterables (M, alpha, rho, sup_sK, sup_s2dK)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BOUND_HEADER)
        for r in rows:
            w.writerow([r[0]] + [repr(float(x)) for x in r[1:]])


def write_multiplier_rows(path, M_values, alpha, freqs):
    """M_values: {M: complex array over freqs}."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MULTIPLIER_HEADER)
        for M, vals in M_values.items():
            for f, z in zip(freqs, vals):
                w.writerow([M, repr(float(alpha)), repr(float(f)), repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z)))])
