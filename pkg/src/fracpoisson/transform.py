"""Differential transforms over lacunary sequences.

    T_N f(t) = sum_{j=N1}^{N2} v_j (P_{a_{j+1}} f(t) - P_{a_j} f(t))
             = int_0^inf K_N(s) f(t - s) ds

The layer differences d_j(t) are computed once per grid point and shared
by every window, so all O(M^2) windows of a truncated maximal operator
come from running sums over j.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_alpha
from .exceptions import DegenerateDenominatorError
from .funcspace import Grid, TestFunction
from .kernel import KernelEval, kernel_value
from .lacunary import LacunarySpec, WindowPair, _as_window, window_indices
from .maximal import default_eps_grid, m_minus_field, m_minus_q_field
from .poisson import _MAX_QUAD_SPLITS, _s_range, _split_at_accumulation, poisson_apply_many
from .quad import QuadConfig, integrate_halfline

__all__ = [
    "WindowPair",
    "TransformField",
    "CotlarResult",
    "layer_differences",
    "transform_apply",
    "maximal_truncated",
    "cotlar_ratio",
    "DENOMINATOR_FLOOR",
]

DENOMINATOR_FLOOR = 1e-12


def layer_differences(f: TestFunction, spec: LacunarySpec, alpha: float, N, ts, method="auto", cfg=None):
    """v_j (P_{a_{j+1}} f - P_{a_j} f) for j in the window; shape (len, len(ts))."""
    N = _as_window(N)
    js = window_indices(spec, N)
    taus = np.array([spec.a_at(j) for j in range(N.N1, N.N2 + 2)])
    P = poisson_apply_many(f, alpha, taus, ts, method=method, cfg=cfg)
    v = np.array([spec.v_at(j) for j in js])
    return v[:, None] * (P[1:] - P[:-1])


def _kernel_conv(f, spec, alpha, N, t, cfg):
    ke = KernelEval(spec, N, alpha)
    _, lo, hi = ke.terms()
    taus = np.concatenate([lo, hi[-1:]])
    s_lo = _s_range(alpha, taus[0])[0]
    s_hi = _s_range(alpha, taus[-1])[1]
    splits = {float(tau * tau / (4.0 * (1.0 + alpha))) for tau in taus}
    bps = _split_at_accumulation(
        f.breakpoints, f.accumulation_point, 1e-12 * s_lo, t - s_hi, t - s_lo, lambda parts: sum(parts, [])
    )
    splits.update(t - b for b in bps if b < t)
    if len(splits) > _MAX_QUAD_SPLITS:
        ordered = sorted(splits)
        splits = {ordered[i] for i in np.linspace(0, len(ordered) - 1, _MAX_QUAD_SPLITS).astype(int)}
    pivot = math.sqrt(s_lo * s_hi) if len(taus) > 1 else taus[0] ** 2 / 4

    def g(s):
        return kernel_value(ke, s) * f(t - s)

    cfg = (cfg or QuadConfig()).with_splits(sorted(splits), pivot=pivot)
    return integrate_halfline(g, cfg).value


def transform_apply(
    f: TestFunction,
    spec: LacunarySpec,
    alpha: float,
    N,
    t: float,
    path: str = "poisson_diff",
    cfg: QuadConfig | None = None,
    method: str = "auto",
) -> float:
    """T_N f(t), as a sum of Poisson differences or as a kernel convolution."""
    alpha = check_alpha(alpha)
    N = _as_window(N)
    if path == "poisson_diff":
        return float(np.sum(layer_differences(f, spec, alpha, N, [t], method, cfg)[:, 0]))
    if path == "kernel_conv":
        window_indices(spec, N)
        return float(_kernel_conv(f, spec, alpha, N, float(t), cfg))
    raise ValueError(f"unknown path {path!r}")


@dataclass(frozen=True, eq=False)
class TransformField:
    """Layer values v_j d_j(t) for j = -M .. M on a grid.

    Any window inside [-M, M] is a partial sum over j.
    """

    grid: Grid
    M: int
    layers: np.ndarray

    def __post_init__(self):
        if self.layers.shape != (2 * self.M + 1, self.grid.count):
            raise ValueError("layers must have shape (2M + 1, grid.count)")

    def window(self, N) -> np.ndarray:
        """T_N f on the grid; summed directly rather than from prefix sums."""
        N = _as_window(N)
        if N.N1 < -self.M or N.N2 > self.M:
            raise ValueError(f"window ({N.N1}, {N.N2}) outside [-{self.M}, {self.M}]")
        return np.sum(self.layers[N.N1 + self.M : N.N2 + self.M + 1], axis=0)

    @property
    def tstar(self) -> np.ndarray:
        """max over -M <= N1 < N2 <= M of |T_N f| at each grid point.

        Running sums from each N1 give every window the same rounding
        whatever M is, so T*_M is exactly nondecreasing in M.
        """
        best = np.zeros(self.grid.count)
        for i in range(2 * self.M):
            run = np.cumsum(self.layers[i:], axis=0)
            best = np.maximum(best, np.max(np.abs(run[1:]), axis=0))
        return best

    def restrict(self, M: int) -> "TransformField":
        if not 1 <= M <= self.M:
            raise ValueError("can only restrict to 1 <= M <= stored M")
        return TransformField(self.grid, M, self.layers[self.M - M : self.M + M + 1])

    def write_windows(self, path, windows):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "N1", "N2", "value"])
            for N in windows:
                N = _as_window(N)
                for t, val in zip(self.grid.points, self.window(N)):
                    w.writerow([repr(float(t)), N.N1, N.N2, repr(float(val))])

    def write_tstar(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "Tstar"])
            for t, val in zip(self.grid.points, self.tstar):
                w.writerow([repr(float(t)), repr(float(val))])


def maximal_truncated(
    f: TestFunction, spec: LacunarySpec, alpha: float, M: int, grid: Grid, method="auto", cfg=None
) -> TransformField:
    """The layer field behind T*_M f on ``grid``."""
    alpha = check_alpha(alpha)
    if M < 1:
        raise ValueError("M must be at least 1")
    layers = layer_differences(f, spec, alpha, (-M, M), grid.points, method, cfg)
    return TransformField(grid, int(M), layers)


@dataclass(frozen=True)
class CotlarResult:
    ratio: float
    t_at_max: float
    excluded: int
    total: int
    q: float
    M: int

    @property
    def excluded_fraction(self):
        return self.excluded / self.total


def cotlar_ratio(
    f: TestFunction,
    spec: LacunarySpec,
    alpha: float,
    q: float,
    M: int,
    grid: Grid,
    eps_grid=None,
    method="auto",
    cfg=None,
    field: TransformField | None = None,
) -> CotlarResult:
    """max over the grid of T*_M f / (M^-(T_(-M,M) f) + M^-_q f).

    Points whose denominator falls below ``DENOMINATOR_FLOOR`` are left out
    and counted; more than half left out raises DegenerateDenominatorError.
    A precomputed ``field`` on the same grid may be passed in.
    """
    if not q > 1:
        raise ValueError("q must exceed 1")
    if field is None:
        field = maximal_truncated(f, spec, alpha, M, grid, method, cfg)
    elif field.grid != grid or field.M < M:
        raise ValueError("field does not match the grid or M")
    field = field.restrict(M) if field.M > M else field
    eps_grid = default_eps_grid(grid) if eps_grid is None else eps_grid
    denom = m_minus_field(field.window((-M, M)), grid, eps_grid) + m_minus_q_field(
        f(grid.points), q, grid, eps_grid
    )
    ok = denom >= DENOMINATOR_FLOOR
    excluded = int(np.count_nonzero(~ok))
    if excluded > grid.count / 2:
        raise DegenerateDenominatorError(
            f"{excluded} of {grid.count} grid points have a denominator below {DENOMINATOR_FLOOR}"
        )
    ratios = np.where(ok, field.tstar / np.where(ok, denom, 1.0), -np.inf)
    i = int(np.argmax(ratios))
    return CotlarResult(float(ratios[i]), float(grid.points[i]), excluded, grid.count, float(q), int(M))
