"""scikit-learn transformers over sampled signals.

Each row of ``X`` is one signal sampled on the uniform grid
``grid_lo + step * arange(n_features)``, read as piecewise constant on
grid cells.  The output has the same shape, evaluated at the same points.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._validation import check_alpha
from .funcspace import Grid, GridSampled
from .lacunary import LacunarySpec
from .poisson import poisson_apply_many
from .transform import layer_differences, maximal_truncated

__all__ = ["PoissonSmoother", "DifferentialTransform", "MaximalDifferentialTransform"]


class _GridTransformer(TransformerMixin, BaseEstimator):
    def _check_common(self):
        check_alpha(self.alpha)
        if not self.step > 0:
            raise ValueError("step must be positive")

    def fit(self, X, y=None):
        X = validate_data(self, X, ensure_min_features=2)
        self._check_params()
        self.grid_ = Grid(float(self.grid_lo), float(self.step), X.shape[1])
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = validate_data(self, X, reset=False)
        return np.vstack([self._row(GridSampled(self.grid_, row)) for row in X])

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = True
        return tags


class PoissonSmoother(_GridTransformer):
    """P_tau^alpha applied to each row."""

    def __init__(self, alpha=0.5, tau=1.0, grid_lo=0.0, step=1.0):
        self.alpha = alpha
        self.tau = tau
        self.grid_lo = grid_lo
        self.step = step

    def _check_params(self):
        self._check_common()
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    def _row(self, f):
        return poisson_apply_many(f, self.alpha, [self.tau], self.grid_.points)[0]


class DifferentialTransform(_GridTransformer):
    """T_N f for a_j = base^j and v_j = sign * (-1)^j, N = (N1, N2)."""

    def __init__(self, alpha=0.5, base=2.0, N1=-4, N2=4, sign=1.0, grid_lo=0.0, step=1.0):
        self.alpha = alpha
        self.base = base
        self.N1 = N1
        self.N2 = N2
        self.sign = sign
        self.grid_lo = grid_lo
        self.step = step

    def _check_params(self):
        self._check_common()
        if not self.N1 < self.N2:
            raise ValueError("need N1 < N2")
        self.spec_ = LacunarySpec.geometric(self.base, self.N1, self.N2, v=lambda j: self.sign * (-1.0) ** j)

    def _row(self, f):
        d = layer_differences(f, self.spec_, self.alpha, (self.N1, self.N2), self.grid_.points)
        return d.sum(axis=0)


class MaximalDifferentialTransform(_GridTransformer):
    """T*_M f, the largest |T_N f| over windows inside [-M, M]."""

    def __init__(self, alpha=0.5, base=2.0, M=4, sign=1.0, grid_lo=0.0, step=1.0):
        self.alpha = alpha
        self.base = base
        self.M = M
        self.sign = sign
        self.grid_lo = grid_lo
        self.step = step

    def _check_params(self):
        self._check_common()
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        self.spec_ = LacunarySpec.geometric(self.base, -self.M, self.M, v=lambda j: self.sign * (-1.0) ** j)

    def _row(self, f):
        return maximal_truncated(f, self.spec_, self.alpha, int(self.M), self.grid_).tstar
