import csv
import math

import numpy as np
import pytest
from scipy import integrate, special

from fracpoisson.exceptions import DegenerateDenominatorError, OutOfRangeError
from fracpoisson.funcspace import (
    AlternatingShellsBothSided,
    Combination,
    Constant,
    Grid,
    Indicator,
    SmoothBump,
)
from fracpoisson.lacunary import LacunarySpec
from fracpoisson.transform import (
    TransformField,
    WindowPair,
    cotlar_ratio,
    maximal_truncated,
    transform_apply,
)

ALPHA = 0.5
SPEC = LacunarySpec.geometric(2.0, -17, 17, v=lambda j: (-1) ** j)
BUMP = SmoothBump(0.3, 1.0)


def _shell_c1(a, alpha):
    """int_0^inf e^{-1/(4u)} u^{-alpha-1} f(-u) du, shell by shell with scipy."""
    g = lambda u: math.exp(-1.0 / (4.0 * u)) * u ** (-alpha - 1.0)
    total = 0.0
    for k in range(-30, 30):
        lo, hi = a ** (2 * k), a ** (2 * k + 1)
        if hi < 1e-3:
            continue  # e^{-1/(4u)} is below 1e-100 there
        total += (-1) ** k * integrate.quad(g, lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
    return total


class TestTransformApply:
    @pytest.mark.parametrize("path", ["poisson_diff", "kernel_conv"])
    @pytest.mark.parametrize("N", [(-3, 3), (0, 5), (-10, -2)])
    def test_constant_vanishes(self, path, N):
        assert abs(transform_apply(Constant(1.0), SPEC, ALPHA, N, 0.7, path=path)) < 1e-8

    def test_paths_agree_on_bump(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            N1 = int(rng.integers(-12, 8))
            N2 = int(rng.integers(N1 + 1, 10))
            t = float(rng.uniform(-1.0, 2.5))
            a = transform_apply(BUMP, SPEC, ALPHA, (N1, N2), t, path="poisson_diff")
            b = transform_apply(BUMP, SPEC, ALPHA, (N1, N2), t, path="kernel_conv")
            assert abs(a - b) < 1e-7, (N1, N2, t)

    @pytest.mark.parametrize("alpha", [0.3, 0.7])
    def test_paths_agree_on_indicator(self, alpha):
        f = Indicator(-0.2, 0.9)
        for t in (-0.1, 0.5, 1.7):
            a = transform_apply(f, SPEC, alpha, (-6, 4), t)
            b = transform_apply(f, SPEC, alpha, (-6, 4), t, path="kernel_conv")
            assert abs(a - b) < 1e-7

    @pytest.mark.parametrize("N", [(0, 1), (-2, 2), (-4, 5), (-8, 8)])
    def test_divergence_increments(self, N):
        a, alpha = 5.0, 0.5
        spec = LacunarySpec.geometric(a, -10, 10, v=lambda j: (-1) ** (j + 1))
        f = AlternatingShellsBothSided(a)
        per_layer = 2 * _shell_c1(a, alpha) / (4**alpha * special.gamma(alpha))
        got = transform_apply(f, spec, alpha, N, 0.0)
        length = N[1] - N[0] + 1
        assert got == pytest.approx(length * per_layer, rel=1e-5)

    def test_linearity(self):
        g = Indicator(0.0, 1.0)
        combo = Combination([(2.0, BUMP), (-0.5, g)])
        for t in (0.2, 1.1):
            lhs = transform_apply(combo, SPEC, ALPHA, (-5, 5), t)
            rhs = 2.0 * transform_apply(BUMP, SPEC, ALPHA, (-5, 5), t) - 0.5 * transform_apply(
                g, SPEC, ALPHA, (-5, 5), t
            )
            assert lhs == pytest.approx(rhs, abs=1e-9)

    @pytest.mark.parametrize("K", [-3, 0, 2])
    def test_window_additivity(self, K):
        t = 0.45
        whole = transform_apply(BUMP, SPEC, ALPHA, (-4, 4), t)
        parts = transform_apply(BUMP, SPEC, ALPHA, (-4, K), t) + transform_apply(BUMP, SPEC, ALPHA, (K + 1, 4), t)
        assert whole == pytest.approx(parts, abs=1e-9)

    def test_sup_decomposition(self):
        M, t = 6, 0.8
        for N1, N2 in [(-3, 2), (0, 4), (-6, -1)]:
            direct = transform_apply(BUMP, SPEC, ALPHA, (N1, N2), t)
            tail = transform_apply(BUMP, SPEC, ALPHA, (N2 + 1, M), t)
            head = transform_apply(BUMP, SPEC, ALPHA, (N1, M), t)
            assert direct == pytest.approx(head - tail, abs=1e-9)

    def test_causality(self):
        t = 0.4
        f = Indicator(-1.0, 0.2)
        g = Combination([(1.0, f), (3.0, Indicator(0.5, 2.0))])  # differs only after t
        for path in ("poisson_diff", "kernel_conv"):
            assert transform_apply(f, SPEC, ALPHA, (-6, 6), t, path=path) == pytest.approx(
                transform_apply(g, SPEC, ALPHA, (-6, 6), t, path=path), abs=1e-12
            )

    def test_window_outside_spec(self):
        with pytest.raises(OutOfRangeError):
            transform_apply(BUMP, SPEC, ALPHA, (-20, 0), 0.0)

    def test_bad_path(self):
        with pytest.raises(ValueError):
            transform_apply(BUMP, SPEC, ALPHA, (0, 1), 0.0, path="fft")


GRID = Grid.from_range(-1.0, 3.0, 1 / 16)


@pytest.fixture(scope="module")
def bump_field():
    return maximal_truncated(BUMP, SPEC, ALPHA, 8, GRID)


class TestMaximalTruncated:
    def test_constant_field_is_zero(self):
        fld = maximal_truncated(Constant(1.0), SPEC, ALPHA, 4, GRID)
        assert np.max(np.abs(fld.tstar)) < 1e-12

    def test_dominates_full_window(self, bump_field):
        assert np.all(bump_field.tstar >= np.abs(bump_field.window((-8, 8))) - 1e-15)

    def test_matches_brute_force(self, bump_field):
        brute = np.zeros(GRID.count)
        for N1 in range(-8, 8):
            for N2 in range(N1 + 1, 9):
                brute = np.maximum(brute, np.abs(bump_field.window((N1, N2))))
        np.testing.assert_allclose(bump_field.tstar, brute, rtol=0, atol=1e-13)

    def test_monotone_in_M(self, bump_field):
        prev = np.zeros(GRID.count)
        for M in (2, 4, 8):
            cur = bump_field.restrict(M).tstar
            assert np.all(cur >= prev)
            prev = cur

    def test_restrict_matches_recompute(self, bump_field):
        direct = maximal_truncated(BUMP, SPEC, ALPHA, 4, GRID)
        np.testing.assert_allclose(bump_field.restrict(4).layers, direct.layers, rtol=0, atol=1e-15)

    def test_window_matches_apply(self, bump_field):
        i = 25
        expect = transform_apply(BUMP, SPEC, ALPHA, (-3, 5), GRID.points[i])
        assert bump_field.window((-3, 5))[i] == pytest.approx(expect, abs=1e-14)

    def test_window_out_of_range(self, bump_field):
        with pytest.raises(ValueError):
            bump_field.window((-9, 0))

    def test_layer_shape_checked(self):
        with pytest.raises(ValueError):
            TransformField(GRID, 2, np.zeros((4, GRID.count)))

    def test_csv(self, bump_field, tmp_path):
        p1, p2 = tmp_path / "w.csv", tmp_path / "s.csv"
        bump_field.write_windows(p1, [WindowPair(-2, 2), (0, 3)])
        bump_field.write_tstar(p2)
        rows = list(csv.reader(open(p1)))
        assert rows[0] == ["t", "N1", "N2", "value"]
        assert len(rows) == 1 + 2 * GRID.count
        assert float(rows[1 + GRID.count + 5][3]) == bump_field.window((0, 3))[5]
        rows = list(csv.reader(open(p2)))
        assert rows[0] == ["t", "Tstar"]
        assert float(rows[-1][1]) == bump_field.tstar[-1]


class TestCotlar:
    def test_zero_function_degenerate(self):
        with pytest.raises(DegenerateDenominatorError):
            cotlar_ratio(Constant(0.0), SPEC, ALPHA, 2.0, 4, GRID)

    def test_rejects_q(self):
        with pytest.raises(ValueError):
            cotlar_ratio(BUMP, SPEC, ALPHA, 1.0, 4, GRID)

    def test_indicator_refinement(self):
        f = Indicator(0.0, 1.0)
        coarse = Grid.from_range(-2.0, 8.0, 1 / 16)
        r1 = cotlar_ratio(f, SPEC, 0.5, 2.0, 8, coarse)
        r2 = cotlar_ratio(f, SPEC, 0.5, 2.0, 8, coarse.refine())
        assert math.isfinite(r1.ratio) and r1.ratio > 0
        assert abs(r2.ratio - r1.ratio) < 0.1 * r1.ratio
        # t <= 0 sees neither f nor its transform
        assert r1.excluded == int(round(2.0 * 16)) + 1

    def test_bump_uniform_in_M(self, bump_field):
        ratios = [cotlar_ratio(BUMP, SPEC, ALPHA, 2.0, M, GRID, field=bump_field).ratio for M in (2, 4, 8)]
        assert max(ratios) < 1.25 * min(ratios)

    def test_field_must_match(self, bump_field):
        with pytest.raises(ValueError):
            cotlar_ratio(BUMP, SPEC, ALPHA, 2.0, 4, GRID.refine(), field=bump_field)

    def test_excluded_fraction(self, bump_field):
        r = cotlar_ratio(BUMP, SPEC, ALPHA, 2.0, 8, GRID, field=bump_field)
        assert 0 < r.excluded_fraction < 0.5
