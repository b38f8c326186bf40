"""Test functions on the real line and grid-based norms.

Every test function is vectorised: calling it with an array returns an
array of values.  Piecewise-constant families also expose their constant
pieces, which lets the Poisson module integrate them in closed form.
Pieces are half-open intervals ``(lo, hi]`` in the function's argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_positive

__all__ = [
    "Grid",
    "TestFunction",
    "Indicator",
    "SmoothBump",
    "Constant",
    "AlternatingShellsBothSided",
    "AlternatingShellsUnit",
    "GridSampled",
    "Combination",
    "Shifted",
    "eval_at",
    "lp_weighted_norm",
    "weak_l1_profile",
    "bmo_seminorm",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid t_i = lo + i * step, i = 0 .. count - 1."""

    lo: float
    step: float
    count: int

    def __post_init__(self):
        check_positive(self.step, "step")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError("count must be a positive integer")
        if not math.isfinite(self.lo):
            raise ValueError("lo must be finite")

    @classmethod
    def from_range(cls, lo, hi, step):
        """Grid on [lo, hi]; hi - lo must be an integer multiple of step."""
        n = (hi - lo) / step
        count = int(round(n))
        if count < 0 or abs(n - count) > 1e-9 * max(1.0, abs(n)):
            raise ValueError("hi - lo must be a non-negative multiple of step")
        return cls(float(lo), float(step), count + 1)

    @property
    def hi(self):
        return self.lo + (self.count - 1) * self.step

    @property
    def points(self):
        return self.lo + self.step * np.arange(self.count)

    def refine(self):
        return Grid(self.lo, self.step / 2.0, 2 * self.count - 1)

    def cell_index(self, t):
        """Index of the left-closed cell [t_i, t_i + step) holding t, or -1."""
        t = np.asarray(t, dtype=float)
        k = np.floor((t - self.lo) / self.step).astype(np.int64)
        ok = (k >= 0) & (k < self.count)
        return np.where(ok, k, -1)


class TestFunction:
    """Base class: a bounded function on R that can be evaluated anywhere."""

    __test__ = False  # keep pytest from collecting this as a test class

    smooth = False
    piecewise_constant = False
    # point where jumps accumulate (shell functions), if any
    accumulation_point = None

    def __call__(self, t):
        raise NotImplementedError

    def sup_norm(self):
        raise NotImplementedError

    def breakpoints(self, lo, hi):
        """Points in [lo, hi] where the function (or its support) jumps."""
        return []

    def pieces(self, lo, hi):
        """Constant pieces ``(c, d, value)`` clipped to [lo, hi]."""
        raise TypeError(f"{type(self).__name__} is not piecewise constant")

    def piece_arrays(self, lo, hi):
        """Same as :meth:`pieces` but as three arrays (starts, ends, values)."""
        pcs = self.pieces(lo, hi)
        if not pcs:
            return np.zeros(0), np.zeros(0), np.zeros(0)
        c, d, v = (np.array(col, dtype=float) for col in zip(*pcs))
        return c, d, v

    def value_at_minus_infinity(self):
        return 0.0

    def support(self):
        """Hull of the support of f - f(-inf) as (lo, hi), or None if empty."""
        raise NotImplementedError


def eval_at(f: TestFunction, t: float) -> float:
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    return float(f(np.array([t]))[0])


@dataclass(frozen=True)
class Indicator(TestFunction):
    lo: float
    hi: float
    piecewise_constant = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("Indicator needs lo < hi")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return ((t > self.lo) & (t <= self.hi)).astype(float)

    def sup_norm(self):
        return 1.0

    def breakpoints(self, lo, hi):
        return [p for p in (self.lo, self.hi) if lo <= p <= hi]

    def support(self):
        return (self.lo, self.hi)

    def pieces(self, lo, hi):
        c, d = max(self.lo, lo), min(self.hi, hi)
        return [(c, d, 1.0)] if c < d else []


@dataclass(frozen=True)
class SmoothBump(TestFunction):
    """exp(1 - 1/(1 - x^2)) with x = (t - center)/halfwidth; peak value 1."""

    center: float = 0.0
    halfwidth: float = 1.0
    smooth = True

    def __post_init__(self):
        check_positive(self.halfwidth, "halfwidth")

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.center) / self.halfwidth
        inside = np.abs(x) < 1.0
        xs = np.where(inside, x, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - xs * xs)), 0.0)

    def derivative(self, t):
        x = (np.asarray(t, dtype=float) - self.center) / self.halfwidth
        inside = np.abs(x) < 1.0
        xs = np.where(inside, x, 0.0)
        q = 1.0 - xs * xs
        val = np.exp(1.0 - 1.0 / q) * (-2.0 * xs / (q * q)) / self.halfwidth
        return np.where(inside, val, 0.0)

    def second_derivative(self, t):
        x = (np.asarray(t, dtype=float) - self.center) / self.halfwidth
        inside = np.abs(x) < 1.0
        xs = np.where(inside, x, 0.0)
        q = 1.0 - xs * xs
        # d/dx of -2x/q^2 plus its square
        poly = 4.0 * xs * xs / q**4 - 2.0 / q**2 - 8.0 * xs * xs / q**3
        val = np.exp(1.0 - 1.0 / q) * poly / self.halfwidth**2
        return np.where(inside, val, 0.0)

    def support(self):
        return (self.center - self.halfwidth, self.center + self.halfwidth)

    def sup_norm(self):
        return 1.0

    def breakpoints(self, lo, hi):
        ends = (self.center - self.halfwidth, self.center + self.halfwidth)
        return [p for p in ends if lo <= p <= hi]


@dataclass(frozen=True)
class Constant(TestFunction):
    c: float = 1.0
    smooth = True
    piecewise_constant = True

    def __call__(self, t):
        return np.full(np.shape(t), float(self.c))

    def derivative(self, t):
        return np.zeros(np.shape(t))

    second_derivative = derivative

    def support(self):
        return None

    def sup_norm(self):
        return abs(self.c)

    def pieces(self, lo, hi):
        return [(lo, hi, float(self.c))] if (self.c != 0 and lo < hi) else []

    def value_at_minus_infinity(self):
        return float(self.c)


def _log_floor(x, a):
    """floor(log_a x) for x > 0, corrected so that a**m <= x < a**(m+1)."""
    m = np.floor(np.log(x) / math.log(a)).astype(np.int64)
    pw = np.power(float(a), m.astype(float))
    m = np.where(pw > x, m - 1, m)
    pw_next = np.power(float(a), (m + 1).astype(float))
    return np.where(pw_next <= x, m + 1, m)


@dataclass(frozen=True)
class AlternatingShellsBothSided(TestFunction):
    """sum over k in Z of (-1)^k on the shells (-a^(2k+1), -a^(2k)]."""

    a: float
    piecewise_constant = True
    accumulation_point = 0.0

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError("shell base a must exceed 1")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        neg = t < 0
        x = np.where(neg, -t, 1.0)
        m = _log_floor(x, self.a)
        even = (m % 2) == 0
        sign = np.where(((m // 2) % 2) == 0, 1.0, -1.0)
        return np.where(neg & even, sign, 0.0)

    def sup_norm(self):
        return 1.0

    def _shell_range(self, lo, hi):
        """Shell indices k whose shell meets [lo, hi] (negative side only)."""
        hi = min(hi, 0.0)
        if lo >= hi:
            return range(0)
        xmin, xmax = -hi, -lo
        la = math.log(self.a)
        kmin = math.floor((math.log(xmin) / la - 1) / 2) - 1 if xmin > 0 else None
        kmax = math.ceil(math.log(xmax) / la / 2) + 1
        if kmin is None:
            raise ValueError("shell pieces accumulate at 0; pass hi < 0 or clip")
        return range(kmin, kmax + 1)

    def pieces(self, lo, hi):
        out = []
        for k in self._shell_range(lo, hi):
            c, d = -self.a ** (2 * k + 1), -self.a ** (2 * k)
            c, d = max(c, lo), min(d, hi)
            if c < d:
                out.append((c, d, (-1.0) ** k))
        return out

    def breakpoints(self, lo, hi):
        pts = []
        for k in self._shell_range(lo, hi):
            for p in (-self.a ** (2 * k + 1), -self.a ** (2 * k)):
                if lo <= p <= hi:
                    pts.append(p)
        return sorted(pts)


@dataclass(frozen=True)
class AlternatingShellsUnit(TestFunction):
    """sum over k <= 0 of (-1)^k on the shells (-a^(2k), -a^(2k-1)]; support in [-1, 0)."""

    a: float
    piecewise_constant = True
    accumulation_point = 0.0

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError("shell base a must exceed 1")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        neg = t < 0
        x = np.where(neg, -t, 1.0)
        m = _log_floor(x, self.a)
        odd = (m % 2) == 1
        k = (m + 1) // 2
        sign = np.where((k % 2) == 0, 1.0, -1.0)
        return np.where(neg & odd & (k <= 0), sign, 0.0)

    def sup_norm(self):
        return 1.0

    def _shell_range(self, lo, hi):
        hi = min(hi, 0.0)
        if lo >= hi:
            return range(0)
        xmin = -hi
        if xmin <= 0:
            raise ValueError("shell pieces accumulate at 0; pass hi < 0 or clip")
        la = math.log(self.a)
        kmin = math.floor(math.log(xmin) / la / 2) - 1
        return range(kmin, 1)

    def pieces(self, lo, hi):
        out = []
        for k in self._shell_range(lo, hi):
            c, d = -self.a ** (2 * k), -self.a ** (2 * k - 1)
            c, d = max(c, lo), min(d, hi)
            if c < d:
                out.append((c, d, (-1.0) ** k))
        return out

    def breakpoints(self, lo, hi):
        pts = []
        for k in self._shell_range(lo, hi):
            for p in (-self.a ** (2 * k), -self.a ** (2 * k - 1)):
                if lo <= p <= hi:
                    pts.append(p)
        return sorted(pts)


class GridSampled(TestFunction):
    """Piecewise constant on left-closed cells [t_i, t_i + step); 0 outside [lo, hi]."""

    piecewise_constant = True

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.count,):
            raise ValueError("values must have one entry per grid point")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"GridSampled({self.grid!r}, <{self.values.size} values>)"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = self.grid.cell_index(t)
        inside = (k >= 0) & (t <= self.grid.hi)
        return np.where(inside, self.values[np.clip(k, 0, None)], 0.0)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def _cells(self):
        t = self.grid.points
        ends = np.minimum(t + self.grid.step, self.grid.hi)
        # the last grid point closes the interval as a degenerate cell
        return t, ends

    def piece_arrays(self, lo, hi):
        starts, ends = self._cells()
        c, d = np.maximum(starts, lo), np.minimum(ends, hi)
        keep = (self.values != 0) & (c < d)
        return c[keep], d[keep], self.values[keep]

    def pieces(self, lo, hi):
        return list(zip(*(col.tolist() for col in self.piece_arrays(lo, hi))))

    def support(self):
        return (self.grid.lo, self.grid.hi)

    def breakpoints(self, lo, hi):
        pts = self.grid.points
        return [float(p) for p in pts if lo <= p <= hi]


class Combination(TestFunction):
    """Finite linear combination sum_i c_i f_i."""

    def __init__(self, terms: Sequence[tuple[float, TestFunction]]):
        self.terms = tuple((float(c), f) for c, f in terms)
        self.smooth = all(f.smooth for _, f in self.terms)
        self.piecewise_constant = all(f.piecewise_constant for _, f in self.terms)

    def __repr__(self):
        return f"Combination({list(self.terms)!r})"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for c, f in self.terms:
            out = out + c * f(t)
        return out

    def derivative(self, t):
        return sum(c * f.derivative(t) for c, f in self.terms)

    def second_derivative(self, t):
        return sum(c * f.second_derivative(t) for c, f in self.terms)

    def support(self):
        hulls = [f.support() for _, f in self.terms]
        hulls = [h for h in hulls if h is not None]
        if not hulls:
            return None
        return (min(h[0] for h in hulls), max(h[1] for h in hulls))

    @property
    def accumulation_point(self):
        pts = {f.accumulation_point for _, f in self.terms} - {None}
        if len(pts) > 1:
            raise ValueError("terms accumulate at different points")
        return pts.pop() if pts else None

    def sup_norm(self):
        return sum(abs(c) * f.sup_norm() for c, f in self.terms)

    def breakpoints(self, lo, hi):
        return sorted({p for _, f in self.terms for p in f.breakpoints(lo, hi)})

    def pieces(self, lo, hi):
        return [(c0, d0, c * v) for c, f in self.terms for c0, d0, v in f.pieces(lo, hi)]

    def value_at_minus_infinity(self):
        return sum(c * f.value_at_minus_infinity() for c, f in self.terms)


class Shifted(TestFunction):
    """t -> f(t - h)."""

    def __init__(self, f: TestFunction, h: float):
        self.f = f
        self.h = float(h)
        self.smooth = f.smooth
        self.piecewise_constant = f.piecewise_constant

    def __repr__(self):
        return f"Shifted({self.f!r}, {self.h})"

    def __call__(self, t):
        return self.f(np.asarray(t, dtype=float) - self.h)

    def derivative(self, t):
        return self.f.derivative(np.asarray(t, dtype=float) - self.h)

    def second_derivative(self, t):
        return self.f.second_derivative(np.asarray(t, dtype=float) - self.h)

    def support(self):
        s = self.f.support()
        return None if s is None else (s[0] + self.h, s[1] + self.h)

    @property
    def accumulation_point(self):
        p = self.f.accumulation_point
        return None if p is None else p + self.h

    def sup_norm(self):
        return self.f.sup_norm()

    def breakpoints(self, lo, hi):
        return [p + self.h for p in self.f.breakpoints(lo - self.h, hi - self.h)]

    def pieces(self, lo, hi):
        return [(c + self.h, d + self.h, v) for c, d, v in self.f.pieces(lo - self.h, hi - self.h)]

    def value_at_minus_infinity(self):
        return self.f.value_at_minus_infinity()


# --- norms on grids -------------------------------------------------------
#
# Grid data are read as piecewise constant on the count - 1 cells
# [t_i, t_{i+1}); the last sample only closes the interval.


def _values_on(f, grid):
    if isinstance(f, TestFunction):
        return f(grid.points)
    vals = np.asarray(f, dtype=float)
    if vals.shape != (grid.count,):
        raise ValueError("value array does not match the grid")
    return vals


def _weight_values(w, grid):
    if w is None:
        return np.ones(grid.count)
    vals = w.w if hasattr(w, "w") else np.asarray(w, dtype=float)
    if hasattr(w, "grid") and w.grid != grid:
        raise ValueError("weight sample lives on a different grid")
    if vals.shape != (grid.count,):
        raise ValueError("weight values do not match the grid")
    if np.any(vals <= 0):
        raise ValueError("weight must be positive on the grid")
    return vals


def lp_weighted_norm(f, p: float, w, grid: Grid) -> float:
    """(sum over cells |f|^p w step)^(1/p); ``w=None`` means w = 1."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    vals = np.abs(_values_on(f, grid))[:-1]
    wv = _weight_values(w, grid)[:-1]
    top = vals.max() if vals.size else 0.0
    if top == 0.0:
        return 0.0
    # scale first so |f|^p cannot underflow or overflow
    return float(top * (np.sum((vals / top) ** p * wv) * grid.step) ** (1.0 / p))


def weak_l1_profile(f_values, w, lambdas, grid: Grid):
    """Rows (lambda, w-measure of {|f| > lambda}) for each lambda."""
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas <= 0):
        raise ValueError("lambdas must be strictly positive")
    if np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambdas must be increasing")
    vals = np.abs(_values_on(f_values, grid))[:-1]
    wv = _weight_values(w, grid)[:-1] * grid.step
    order = np.argsort(vals)
    sorted_vals = vals[order]
    tail = np.concatenate([np.cumsum(wv[order][::-1])[::-1], [0.0]])
    idx = np.searchsorted(sorted_vals, lambdas, side="right")
    return np.column_stack([lambdas, tail[idx]])


def bmo_seminorm(f_values) -> float:
    """Largest mean oscillation over dyadic-length windows of grid cells.

    Windows of 2^k cells are taken at offsets that are multiples of
    2^(k-1), so every dyadic window and its half-shift are covered.
    """
    v = np.asarray(f_values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least 2 grid points")
    cells = v[:-1]
    n = cells.size
    best = 0.0
    length = 1
    while length <= n:
        stride = max(1, length // 2)
        starts = np.arange(0, n - length + 1, stride)
        if starts[-1] != n - length:
            starts = np.append(starts, n - length)
        win = cells[starts[:, None] + np.arange(length)[None, :]] if length > 1 else None
        if win is not None:
            means = win.mean(axis=1, keepdims=True)
            osc = np.abs(win - means).mean(axis=1)
            best = max(best, float(osc.max()))
        length *= 2
    return best
