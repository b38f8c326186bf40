"""One-sided Hardy-Littlewood maximal functions on uniform grids and
checkers for the one-sided weight classes A_1^- and A_p^-.

Each sample stands for one grid cell on the side the average looks at:
M^- averages over (t - eps, t] and gives sample t_k the cell
(t_k - h, t_k]; M^+ averages over [t, t + eps) with cells [t_k, t_k + h).
Both windows contain the sample at t, so M^-f(t) >= |f(t)| at eps = h,
and the mirror image of M^- is exactly M^+.  A window end inside a cell
takes the covered fraction of that cell.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .funcspace import Grid

__all__ = [
    "WeightSample",
    "WeightCheck",
    "default_eps_grid",
    "m_minus",
    "m_plus",
    "m_minus_q",
    "m_minus_field",
    "m_plus_field",
    "m_minus_q_field",
    "check_a1_minus",
    "check_ap_minus",
    "write_maximal_rows",
    "write_weight_rows",
]

STABILITY_TOL = 0.05


@dataclass(frozen=True, eq=False)
class WeightSample:
    """Positive weight on a grid; ``func`` (optional) allows resampling."""

    grid: Grid
    w: np.ndarray
    func: Callable | None = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (self.grid.count,):
            raise ValueError("weight values must match the grid")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weight must be positive and finite on the grid")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_function(cls, func, grid: Grid):
        return cls(grid, func(grid.points), func)

    def resample(self, grid: Grid) -> "WeightSample":
        if self.func is None:
            raise ValueError("resampling needs the weight function")
        return WeightSample.from_function(self.func, grid)


@dataclass(frozen=True)
class WeightCheck:
    p: float
    constant: float
    passed: bool
    refined: float
    extended: float | None


def default_eps_grid(grid: Grid, ratio: float = 2.0**0.25):
    """Geometric radii from one step to the full span."""
    span = grid.hi - grid.lo
    if span <= 0:
        raise ValueError("grid needs at least two points")
    k = int(math.floor(math.log(span / grid.step) / math.log(ratio) + 1e-9))
    return grid.step * ratio ** np.arange(k + 1)


class _BlockSums:
    """Sums of 2^L consecutive cells for every L and start.

    Window sums are assembled from at most log2(n) blocks of nonnegative
    terms, so they carry no cancellation.  A running integral would lose
    every digit for weights spread over many orders of magnitude.
    """

    def __init__(self, cells):
        levels = [np.asarray(cells, dtype=float)]
        while levels[-1].size > 1:
            prev = levels[-1]
            h = 1 << (len(levels) - 1)
            if prev.size <= h:
                break
            levels.append(prev[:-h] + prev[h:])
        self.levels = levels

    def window(self, start, k):
        """Sum of cells start .. start + k - 1 (arrays of starts, one k)."""
        start = np.asarray(start, dtype=np.int64)
        total = np.zeros(start.shape)
        pos = start.copy()
        L = 0
        while k:
            if k & 1:
                total += self.levels[L][pos]
                pos += 1 << L
            k >>= 1
            L += 1
        return total


def _split_radius(eps, step):
    x = eps / step
    k = int(math.floor(x + 1e-9))
    r = x - k
    return k, (0.0 if r < 1e-9 else r)


def _field(vals, grid, eps_grid, side, q=1.0):
    if eps_grid is None:
        eps_grid = default_eps_grid(grid)
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (grid.count,):
        raise ValueError("values must match the grid")
    a = np.abs(vals)
    top = a.max()
    if top == 0:
        return np.zeros(grid.count)
    cells = (a / top) ** q
    blocks = _BlockSums(cells)
    n = grid.count
    idx = np.arange(n)
    best = np.zeros(n)
    for eps in np.asarray(eps_grid, dtype=float):
        k, r = _split_radius(eps, grid.step)
        need = k + (1 if r > 0 else 0)
        if side == "left":
            ok = idx[idx - need >= 0]
            part = r * cells[ok - k] if r > 0 else 0.0
            full = blocks.window(ok - k + 1, k) if k else 0.0
        else:
            ok = idx[idx + need <= n - 1]
            part = r * cells[ok + k] if r > 0 else 0.0
            full = blocks.window(ok, k) if k else 0.0
        if ok.size == 0:
            continue
        mean = (full + part) * grid.step / eps
        best[ok] = np.maximum(best[ok], mean)
    return top * best ** (1.0 / q)


def m_minus_field(f_values, grid: Grid, eps_grid=None):
    """M^- f at every grid point (0 where no admissible radius exists)."""
    return _field(f_values, grid, eps_grid, "left")


def m_plus_field(f_values, grid: Grid, eps_grid=None):
    return _field(f_values, grid, eps_grid, "right")


def m_minus_q_field(f_values, q: float, grid: Grid, eps_grid=None):
    if not q > 1:
        raise ValueError("q must exceed 1")
    return _field(f_values, grid, eps_grid, "left", q)


def _pointwise(vals, t_index, eps_grid, grid, side, q=1.0):
    if not 0 <= t_index < grid.count:
        raise IndexError("t_index outside the grid")
    eps = np.asarray(eps_grid if eps_grid is not None else default_eps_grid(grid), dtype=float)
    room = grid.points[t_index] - grid.lo if side == "left" else grid.hi - grid.points[t_index]
    eps = eps[eps <= room + 1e-12 * grid.step]
    if eps.size == 0:
        return 0.0
    return float(_field(vals, grid, eps, side, q)[t_index])


def m_minus(f_values, t_index: int, eps_grid, grid: Grid) -> float:
    """max over eps of (1/eps) int_{t-eps}^t |f|."""
    return _pointwise(f_values, t_index, eps_grid, grid, "left")


def m_plus(f_values, t_index: int, eps_grid, grid: Grid) -> float:
    return _pointwise(f_values, t_index, eps_grid, grid, "right")


def m_minus_q(f_values, q: float, t_index: int, eps_grid, grid: Grid) -> float:
    if not q > 1:
        raise ValueError("q must exceed 1")
    return _pointwise(f_values, t_index, eps_grid, grid, "left", q)


# --- weight classes ------------------------------------------------------


def _a1_constant(ws: WeightSample, eps_grid=None):
    ratio = m_plus_field(ws.w, ws.grid, eps_grid) / ws.w
    return float(np.max(ratio[:-1]))  # the last point has no right window


def _refined_grid(grid):
    return grid.refine()


def _extended_grid(grid):
    span = grid.hi - grid.lo
    return Grid(grid.lo - span / 2, grid.step, 2 * (grid.count - 1) + 1)


def _central_half(ws):
    n = ws.grid.count
    i0, i1 = n // 4, n - n // 4
    sub = Grid(float(ws.grid.points[i0]), ws.grid.step, i1 - i0)
    return WeightSample(sub, ws.w[i0:i1])


def _stable(a, b):
    return math.isfinite(a) and math.isfinite(b) and abs(b - a) < STABILITY_TOL * abs(a)


def check_a1_minus(w: WeightSample, eps_grid=None) -> WeightCheck:
    """C = max_t M^+w(t)/w(t).

    Passes when C changes by less than 5% both under refinement and under
    a change of span.  Refinement alone cannot catch weights whose
    constant grows with the window (w = e^t).  With a known weight
    function the step is halved and the span doubled; with samples only,
    the radii are refined and the span comparison uses the central half.
    """
    base = _a1_constant(w, eps_grid)
    if w.func is None:
        fine = default_eps_grid(w.grid, 2.0**0.125) if eps_grid is None else _refine_eps(eps_grid)
        refined = _a1_constant(w, fine)
        half = _a1_constant(_central_half(w))
        return WeightCheck(1.0, base, _stable(base, refined) and _stable(half, base), refined, half)
    refined = _a1_constant(w.resample(_refined_grid(w.grid)))
    extended = _a1_constant(w.resample(_extended_grid(w.grid)))
    return WeightCheck(1.0, base, _stable(base, refined) and _stable(base, extended), refined, extended)


def _refine_eps(eps):
    eps = np.sort(np.asarray(eps, dtype=float))
    mids = np.sqrt(eps[1:] * eps[:-1])
    return np.sort(np.concatenate([eps, mids]))


def _ap_constant(ws: WeightSample, p: float, triple_budget: int):
    grid = ws.grid
    pp = p / (p - 1.0)
    # the constant is scale invariant, so normalise
    wn = ws.w / np.max(ws.w)
    bw = _BlockSums(wn[:-1])
    bd = _BlockSums((wn ** (1.0 - pp))[:-1])
    n = grid.count
    gaps = [1 << L for L in range(len(bw.levels)) if (1 << L) <= n - 1]
    pairs = [(g1, g2) for g1 in gaps for g2 in gaps if g1 + g2 <= n - 1]
    per_b = max(1, triple_budget // max(1, len(pairs)))
    b_all = np.arange(1, n - 1)
    if b_all.size > per_b:
        b_all = np.unique(np.linspace(1, n - 2, per_b).round().astype(int))
    best = 0.0
    for g1, g2 in pairs:
        b = b_all[(b_all - g1 >= 0) & (b_all + g2 <= n - 1)]
        if b.size == 0:
            continue
        # dyadic gaps are single blocks
        left = (bd.levels[g1.bit_length() - 1][b - g1] * grid.step) ** (1.0 / pp)
        right = (bw.levels[g2.bit_length() - 1][b] * grid.step) ** (1.0 / p)
        val = left * right / ((g1 + g2) * grid.step)
        best = max(best, float(np.max(val)))
    return best


def check_ap_minus(w: WeightSample, p: float, triple_budget: int = 200_000) -> WeightCheck:
    """max over triples a<b<c of (int_a^b w^(1-p'))^(1/p') (int_b^c w)^(1/p) / (c-a).

    Triples use grid points with power-of-two gaps on both sides.  The
    pass rule matches ``check_a1_minus``; with samples only there is no
    finer data, so only the span comparison applies.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    if triple_budget < 1:
        raise ValueError("triple_budget must be positive")
    base = _ap_constant(w, p, triple_budget)
    if w.func is None:
        half = _ap_constant(_central_half(w), p, triple_budget)
        return WeightCheck(p, base, _stable(half, base), base, half)
    refined = _ap_constant(w.resample(_refined_grid(w.grid)), p, triple_budget)
    extended = _ap_constant(w.resample(_extended_grid(w.grid)), p, triple_budget)
    return WeightCheck(p, base, _stable(base, refined) and _stable(base, extended), refined, extended)


# --- CSV -----------------------------------------------------------------


def write_maximal_rows(path, grid: Grid, m_minus_vals, m_plus_vals, m_minus_q_vals):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "Mminus", "Mplus", "Mminus_q"])
        for row in zip(grid.points, m_minus_vals, m_plus_vals, m_minus_q_vals):
            w.writerow([repr(float(x)) for x in row])


def write_weight_rows(path, checks):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "constant", "pass"])
        for c in checks:
            w.writerow([repr(float(c.p)), repr(float(c.constant)), int(bool(c.passed))])
