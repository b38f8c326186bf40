"""The one-sided fractional Poisson operator and its companions.

    P_tau f(t) = 1/(4^a Gamma(a)) * int_0^inf tau^(2a) exp(-tau^2/(4s)) s^(-1-a) f(t - s) ds

The kernel is a probability density in s.  Its distribution function is
an incomplete gamma function, 1 - P(a, tau^2/(4s)), which gives exact
values on piecewise-constant inputs ("exact" path).  Everything else goes
through adaptive quadrature ("quad" path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._validation import check_alpha, check_finite, check_positive
from .funcspace import TestFunction
from .quad import QuadConfig, integrate_halfline, integrate_interval

__all__ = [
    "PoissonParams",
    "log_layer",
    "poisson_apply",
    "poisson_apply_many",
    "poisson_dtau",
    "dleft_frac",
    "extension_residual",
]

# kernel mass left outside the truncated piece window
_TAIL_MASS = 1e-17
_MAX_QUAD_SPLITS = 400


@dataclass(frozen=True)
class PoissonParams:
    alpha: float
    tau: float

    def __post_init__(self):
        check_alpha(self.alpha)
        check_positive(self.tau, "tau")

    @property
    def norm(self):
        """4^alpha Gamma(alpha), the total mass of the unnormalised kernel."""
        return 4.0**self.alpha * math.gamma(self.alpha)

    @property
    def c_alpha(self):
        a = self.alpha
        return 4.0 ** (a - 0.5) * math.gamma(a) / math.gamma(1.0 - a)

    def with_tau(self, tau):
        return PoissonParams(self.alpha, tau)


def log_layer(alpha, tau, s):
    """log of tau^(2a) exp(-tau^2/(4s)) s^(-1-a), finite-safe for s > 0."""
    s = np.asarray(s, dtype=float)
    return 2.0 * alpha * math.log(tau) - tau * tau / (4.0 * s) - (1.0 + alpha) * np.log(s)


def _density(alpha, tau):
    log_norm = alpha * math.log(4.0) + special.gammaln(alpha)

    def k(s):
        return np.exp(log_layer(alpha, tau, s) - log_norm)

    return k


def _s_range(alpha, tau):
    """(s_min, s_max) holding all but ~1e-17 of the kernel mass on each side."""
    # mass below s is Q(a, tau^2/(4s)), which is below 1e-17 once the argument passes ~45
    z_hi = special.gammainccinv(alpha, _TAIL_MASS)
    # mass above s is P(a, tau^2/(4s)) ~ z^a / Gamma(a+1)
    z_lo = special.gammaincinv(alpha, _TAIL_MASS)
    return tau * tau / (4.0 * z_hi), tau * tau / (4.0 * max(z_lo, 1e-300))


def _piece_window(f, t_lo, t_hi, alpha, taus):
    """Constant pieces of f that matter for P_tau f(t), t in [t_lo, t_hi]."""
    s_max = max(_s_range(alpha, tau)[1] for tau in taus)
    # pieces to the right of t get zero mass, so hi = t_hi is safe
    lo, hi = t_lo - s_max, t_hi
    acc = f.accumulation_point
    # pieces pile up at acc; the skipped gap carries kernel mass below
    # sup(density) * 2 * gap, and the density is bounded by ~4 / tau^2
    gap = 1e-17 * min(taus) ** 2
    return _split_at_accumulation(f.piece_arrays, acc, gap, lo, hi, _concat_pieces)


def _concat_pieces(parts):
    if not parts:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    return tuple(np.concatenate(cols) for cols in zip(*parts))


def _split_at_accumulation(query, acc, gap, lo, hi, join):
    """Run query on [lo, hi] minus (acc - gap, acc + gap)."""
    if acc is None or acc + gap <= lo or acc - gap >= hi:
        return query(lo, hi)
    parts = []
    if lo < acc - gap:
        parts.append(query(lo, acc - gap))
    if acc + gap < hi:
        parts.append(query(acc + gap, hi))
    return join(parts)


def _masses(alpha, tau, s1, s2):
    """Kernel mass on (s1, s2) for arrays 0 <= s1 <= s2 <= inf."""
    with np.errstate(divide="ignore"):
        z1 = tau * tau / (4.0 * s1)
        z2 = tau * tau / (4.0 * s2)
    upper = z2 > alpha  # both arguments large: the upper function is accurate
    return np.where(
        upper,
        special.gammaincc(alpha, z2) - special.gammaincc(alpha, z1),
        special.gammainc(alpha, z1) - special.gammainc(alpha, z2),
    )


def _mass_dtau(alpha, tau, s1, s2):
    with np.errstate(divide="ignore"):
        z1 = tau * tau / (4.0 * s1)
        z2 = tau * tau / (4.0 * s2)

    def g(z):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(alpha * np.log(z) - z - special.gammaln(alpha))
        return np.where(np.isfinite(z) & (z > 0), out, 0.0)

    return (2.0 / tau) * (g(z1) - g(z2))


def _exact_apply(f, alpha, taus, ts, deriv=False):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    c, d, v = _piece_window(f, ts.min(), ts.max(), alpha, taus)
    out = np.zeros((taus.size, ts.size))
    if v.size == 0:
        return out
    # bound memory of the (t, piece) block
    chunk = max(1, 2_000_000 // v.size)
    for i, tau in enumerate(taus):
        for j0 in range(0, ts.size, chunk):
            t = ts[j0 : j0 + chunk, None]
            s1 = np.maximum(t - d[None, :], 0.0)
            s2 = np.maximum(t - c[None, :], 0.0)
            m = _mass_dtau(alpha, tau, s1, s2) if deriv else _masses(alpha, tau, s1, s2)
            out[i, j0 : j0 + chunk] = m @ v
    return out


def _quad_splits(f, t, alpha, tau):
    s_min, s_max = _s_range(alpha, tau)
    lo, hi = t - s_max, t - s_min
    pts = _split_at_accumulation(
        f.breakpoints, f.accumulation_point, 1e-12 * tau * tau, lo, hi, lambda parts: sum(parts, [])
    )
    splits = sorted(t - p for p in pts if p < t)
    if len(splits) > _MAX_QUAD_SPLITS:
        idx = np.linspace(0, len(splits) - 1, _MAX_QUAD_SPLITS).astype(int)
        splits = [splits[i] for i in idx]
    return splits


def _quad_apply(f, p, t, cfg):
    k = _density(p.alpha, p.tau)
    cfg = (cfg or QuadConfig()).with_splits(_quad_splits(f, t, p.alpha, p.tau), pivot=p.tau**2 / 4)
    return integrate_halfline(lambda s: k(s) * f(t - s), cfg).value


def _choose(f, method):
    if method not in ("auto", "exact", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        return "exact" if f.piecewise_constant else "quad"
    if method == "exact" and not f.piecewise_constant:
        raise ValueError("the exact path needs a piecewise-constant function")
    return method


def poisson_apply(f: TestFunction, p: PoissonParams, t: float, method="auto", cfg=None) -> float:
    """P_tau^alpha f(t)."""
    t = check_finite(t, "t")
    if _choose(f, method) == "exact":
        return float(_exact_apply(f, p.alpha, [p.tau], [t])[0, 0])
    return float(_quad_apply(f, p, t, cfg))


def poisson_apply_many(f: TestFunction, alpha: float, taus, ts, method="auto", cfg=None):
    """Array of P_tau f(t) with shape (len(taus), len(ts))."""
    alpha = check_alpha(alpha)
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(taus <= 0):
        raise ValueError("tau must be positive")
    if _choose(f, method) == "exact":
        return _exact_apply(f, alpha, taus, ts)
    out = np.empty((taus.size, ts.size))
    for i, tau in enumerate(taus):
        p = PoissonParams(alpha, float(tau))
        for j, t in enumerate(ts):
            out[i, j] = _quad_apply(f, p, float(t), cfg)
    return out


def poisson_dtau(f: TestFunction, p: PoissonParams, t: float, method="auto", cfg=None) -> float:
    """d/dtau of P_tau f(t), from the differentiated kernel."""
    t = check_finite(t, "t")
    if _choose(f, method) == "exact":
        return float(_exact_apply(f, p.alpha, [p.tau], [t], deriv=True)[0, 0])
    a, tau = p.alpha, p.tau
    k = _density(a, tau)
    ft = float(f(np.array([t]))[0])

    # the weight (2a/tau - tau/(2s)) k(s) integrates to zero, so subtract f(t)
    def g(s):
        return (2.0 * a / tau - tau / (2.0 * s)) * k(s) * (f(t - s) - ft)

    cfg = (cfg or QuadConfig()).with_splits(_quad_splits(f, t, a, tau), pivot=tau**2 / 4)
    return float(integrate_halfline(g, cfg).value)


def dleft_frac(f: TestFunction, alpha: float, t: float, h_near: float = 1e-3, cfg=None) -> float:
    """(D_left)^alpha f(t) = 1/Gamma(-a) int_0^inf (f(t-s) - f(t)) s^(-a-1) ds.

    Only for smooth f.  Near s = 0 the first-order Taylor term is subtracted
    and integrated in closed form; for very small s the second-order
    Taylor term replaces the difference, which would otherwise be lost to
    cancellation.
    """
    alpha = check_alpha(alpha)
    t = check_finite(t, "t")
    if not getattr(f, "smooth", False):
        raise ValueError("dleft_frac needs a smooth test function (pointwise formula needs regularity)")
    cfg = cfg or QuadConfig()
    a = alpha
    tt = np.array([t])
    f0 = float(f(tt)[0])
    f1 = float(f.derivative(tt)[0])
    f2 = float(f.second_derivative(tt)[0])
    # below s_taylor rounding in the difference outweighs the s^3 Taylor remainder
    s_taylor = min(1e-5, 0.1 * h_near)

    def near(s):
        diff = f(t - s) - f0 + s * f1
        diff = np.where(s < s_taylor, 0.5 * f2 * s * s, diff)
        return diff * s ** (-a - 1.0)

    supp = f.support()
    total = 0.0
    if supp is not None:
        near_cfg = QuadConfig(cfg.rel_tol, max(cfg.abs_tol, 1e-11), cfg.max_subdivisions, (s_taylor,))
        total += integrate_interval(near, 0.0, h_near, near_cfg).value
        total -= f1 * h_near ** (1.0 - a) / (1.0 - a)

    # far field: the part of f that differs from its value at -inf is compactly supported
    c_inf = f.value_at_minus_infinity()
    total += (c_inf - f0) * h_near ** (-a) / a
    if supp is not None:
        s_lo, s_hi = max(h_near, t - supp[1]), t - supp[0]
        if s_lo < s_hi:
            splits = [x for x in (t - b for b in f.breakpoints(supp[0], supp[1])) if s_lo < x < s_hi]
            far = integrate_interval(
                lambda s: (f(t - s) - c_inf) * s ** (-a - 1.0), s_lo, s_hi, cfg.with_splits(splits)
            )
            total += far.value
    return float(total / special.gamma(-a))


def extension_residual(
    f: TestFunction, p: PoissonParams, t: float, h_t: float, h_tau: float, cfg=None, drift_sign: float = 1.0
) -> float:
    """|-D U + drift_sign (1-2a)/tau U_tau + U_tautau| at (t, tau), U = P_tau f(t).

    D is the right derivative in t, taken as the second-order one-sided
    difference (-3U(t) + 4U(t+h) - U(t+2h)) / (2h); the tau derivatives
    are central differences.  ``drift_sign=-1`` flips the drift term,
    which is useful as a negative control.
    """
    check_positive(h_t, "h_t")
    check_positive(h_tau, "h_tau")
    if not h_tau < p.tau:
        raise ValueError("h_tau must be smaller than tau")
    cfg = cfg or QuadConfig(rel_tol=1e-13, abs_tol=1e-15, max_subdivisions=4000)

    def u(tt, tau):
        return poisson_apply(f, p.with_tau(tau), tt, cfg=cfg)

    tau = p.tau
    u0 = u(t, tau)
    d_t = (-3.0 * u0 + 4.0 * u(t + h_t, tau) - u(t + 2.0 * h_t, tau)) / (2.0 * h_t)
    up, um = u(t, tau + h_tau), u(t, tau - h_tau)
    u_tau = (up - um) / (2.0 * h_tau)
    u_tautau = (up - 2.0 * u0 + um) / h_tau**2
    drift = drift_sign * (1.0 - 2.0 * p.alpha) / tau
    return float(abs(-d_t + drift * u_tau + u_tautau))
