"""Finite windows of lacunary sequences and their normalisation.

A window stores a_j for j = j_min .. j_max together with multipliers v_j.
The layer j is the difference P_{a_{j+1}} - P_{a_j}; it needs a_{j+1}, so
a window of n terms carries n - 1 layers.  ``v`` may have n - 1 entries
(one per layer) or n entries (the last one is kept for bookkeeping only).
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import OutOfRangeError

__all__ = [
    "WindowPair",
    "LacunarySpec",
    "NormalizedSpec",
    "normalize",
    "window_indices",
    "read_spec",
    "write_spec",
]

_RATIO_SLACK = 1e-12


@dataclass(frozen=True)
class WindowPair:
    N1: int
    N2: int

    def __post_init__(self):
        if int(self.N1) != self.N1 or int(self.N2) != self.N2:
            raise ValueError("window bounds must be integers")
        if not self.N1 < self.N2:
            raise ValueError(f"window needs N1 < N2, got ({self.N1}, {self.N2})")

    def __iter__(self):
        return iter((self.N1, self.N2))

    @property
    def length(self):
        return self.N2 - self.N1 + 1


def _as_window(N):
    return N if isinstance(N, WindowPair) else WindowPair(*N)


@dataclass(frozen=True, eq=False)
class LacunarySpec:
    rho: float
    a: np.ndarray
    v: np.ndarray
    j_min: int = 0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).copy()
        v = np.asarray(self.v, dtype=float).copy()
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")
        if a.ndim != 1 or a.size < 2:
            raise ValueError("need at least two sequence terms")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ValueError("sequence terms must be positive and finite")
        if np.any(a[1:] / a[:-1] < self.rho * (1 - _RATIO_SLACK)):
            raise ValueError(f"sequence is not {self.rho}-lacunary")
        if v.ndim != 1 or v.size not in (a.size - 1, a.size):
            raise ValueError("v needs one entry per layer or per term")
        if not np.all(np.isfinite(v)):
            raise ValueError("multipliers must be finite")
        a.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "j_min", int(self.j_min))

    @classmethod
    def geometric(cls, base, j_min, j_max, v=1.0, rho=None):
        """a_j = base**j for j_min <= j <= j_max + 1, so layers j_min .. j_max exist.

        ``v`` is a scalar, an array over the layers, or a callable j -> v_j.
        """
        j = np.arange(j_min, j_max + 1)
        a = float(base) ** np.arange(j_min, j_max + 2, dtype=float)
        if callable(v):
            vals = np.array([float(v(int(k))) for k in j])
        else:
            vals = np.broadcast_to(np.asarray(v, dtype=float), j.shape).copy()
        return cls(float(base) if rho is None else rho, a, vals, j_min)

    @property
    def j_max(self):
        return self.j_min + self.a.size - 1

    @property
    def layer_range(self):
        """Indices j with both a_j and a_{j+1} stored."""
        return range(self.j_min, self.j_max)

    def a_at(self, j):
        if not self.j_min <= j <= self.j_max:
            raise OutOfRangeError(f"a_{j} outside stored range [{self.j_min}, {self.j_max}]")
        return float(self.a[j - self.j_min])

    def v_at(self, j):
        if not self.j_min <= j < self.j_min + self.v.size:
            raise OutOfRangeError(f"v_{j} outside stored range")
        return float(self.v[j - self.j_min])

    def layer_taus(self):
        """(a_j, a_{j+1}, v_j) arrays over the layer range."""
        n = self.a.size - 1
        return self.a[:-1], self.a[1:], self.v[:n]

    def v_sup(self):
        return float(np.max(np.abs(self.v))) if self.v.size else 0.0

    def scaled(self, c):
        return LacunarySpec(self.rho, self.a, c * self.v, self.j_min)

    def __eq__(self, other):
        return (
            isinstance(other, LacunarySpec)
            and self.rho == other.rho
            and self.j_min == other.j_min
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.v, other.v)
        )

    def __hash__(self):
        return hash((self.rho, self.j_min, self.a.tobytes(), self.v.tobytes()))


def window_indices(spec: LacunarySpec, N) -> range:
    """The layer indices N1 .. N2, checked against the stored window."""
    N = _as_window(N)
    if N.N1 < spec.j_min or N.N2 + 1 > spec.j_max:
        raise OutOfRangeError(
            f"window ({N.N1}, {N.N2}) needs a_{N.N1} .. a_{N.N2 + 1}; stored {spec.j_min} .. {spec.j_max}"
        )
    if N.N2 >= spec.j_min + spec.v.size:
        raise OutOfRangeError(f"v_{N.N2} is not stored")
    return range(N.N1, N.N2 + 1)


@dataclass(frozen=True, eq=False)
class NormalizedSpec:
    """Refined sequence eta with rho <= eta_{k+1}/eta_k <= rho^2.

    ``position[j]`` is the index k with eta_k = a_j, and ``remap[j]`` is
    J(j) = {k : a_j <= eta_k < a_{j+1}}.
    """

    rho: float
    eta: np.ndarray
    omega: np.ndarray
    k_min: int
    position: dict = field(repr=False)
    remap: dict = field(repr=False)

    def as_spec(self) -> LacunarySpec:
        return LacunarySpec(self.rho, self.eta, self.omega, self.k_min)

    def window(self, N) -> WindowPair:
        """N' with T_N under (a, v) equal to T_N' under (eta, omega)."""
        N = _as_window(N)
        return WindowPair(self.position[N.N1], self.position[N.N2 + 1] - 1)


def _refine_up(lo, hi, rho):
    """Points strictly between lo and hi, inserted by factors of rho."""
    out = []
    cur = lo
    while hi / cur > rho * rho:
        cur = rho * cur
        out.append(cur)
    return out


def _refine_down(hi, lo, rho):
    out = []
    cur = hi
    while cur / lo > rho * rho:
        cur = cur / rho
        out.append(cur)
    return out[::-1]


def normalize(spec: LacunarySpec) -> NormalizedSpec:
    """Insert terms so that consecutive ratios lie in [rho, rho^2].

    From a_0 upward, rho * eta is inserted while the next term is more than
    rho^2 times the current one (equality takes the next term).  Below
    a_0 the same loop runs downward, dividing by rho.  A window without
    j = 0 is anchored at its first term.
    """
    rho = spec.rho
    a = spec.a
    j0 = 0 if spec.j_min <= 0 <= spec.j_max else spec.j_min
    i0 = j0 - spec.j_min

    up = [a[i0]]
    up_pos = {j0: 0}
    for i in range(i0 + 1, a.size):
        up.extend(_refine_up(up[-1], a[i], rho))
        up.append(a[i])
        up_pos[spec.j_min + i] = len(up) - 1

    down = []
    down_pos = {}
    cur = a[i0]
    for i in range(i0 - 1, -1, -1):
        ins = _refine_down(cur, a[i], rho)
        down = [a[i]] + ins + down
        for j in down_pos:
            down_pos[j] += len(ins) + 1
        down_pos[spec.j_min + i] = 0
        cur = a[i]

    eta = np.array(down + up)
    k_min = j0 - len(down)
    position = {j: k_min + p for j, p in down_pos.items()}
    position.update({j: k_min + len(down) + p for j, p in up_pos.items()})

    n_layers = min(spec.v.size, a.size - 1)
    remap = {}
    omega = []
    for j in range(spec.j_min, spec.j_min + n_layers):
        ks = range(position[j], position[j + 1])
        remap[j] = ks
        omega.extend([spec.v[j - spec.j_min]] * len(ks))
    if spec.v.size == a.size:
        remap[spec.j_max] = range(position[spec.j_max], position[spec.j_max] + 1)
        omega.append(spec.v[-1])
    return NormalizedSpec(rho, eta, np.array(omega, dtype=float), k_min, position, remap)


def write_spec(spec: LacunarySpec, dest) -> None:
    """Write ``j a_j v_j`` lines (v left blank past the stored multipliers)."""
    lines = [f"# rho {spec.rho!r}"]
    for i, aj in enumerate(spec.a):
        j = spec.j_min + i
        vj = repr(float(spec.v[i])) if i < spec.v.size else ""
        lines.append(f"{j} {float(aj)!r} {vj}".rstrip())
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            fh.write(text)
    else:
        dest.write(text)


def read_spec(src, rho: float | None = None) -> LacunarySpec:
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            text = fh.read()
    else:
        text = src.read()
    js, a_vals, v_vals = [], [], []
    for raw in io.StringIO(text):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "rho" and rho is None:
                rho = float(parts[1])
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"bad line {line!r}: expected 'j a_j v_j'")
        js.append(int(parts[0]))
        a_vals.append(float(parts[1]))
        if len(parts) == 3:
            if len(v_vals) != len(js) - 1:
                raise ValueError("multipliers must be given for a leading run of indices")
            v_vals.append(float(parts[2]))
    if not js:
        raise ValueError("empty sequence file")
    if js != list(range(js[0], js[0] + len(js))):
        raise ValueError("indices must be consecutive")
    if rho is None:
        raise ValueError("rho missing: pass it or add a '# rho' line")
    return LacunarySpec(rho, np.array(a_vals), np.array(v_vals), js[0])
