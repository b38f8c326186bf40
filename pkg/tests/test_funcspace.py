import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpoisson.funcspace import (
    AlternatingShellsBothSided,
    AlternatingShellsUnit,
    Combination,
    Constant,
    Grid,
    GridSampled,
    Indicator,
    Shifted,
    SmoothBump,
    bmo_seminorm,
    eval_at,
    lp_weighted_norm,
    weak_l1_profile,
)


class TestGrid:
    def test_from_range(self):
        g = Grid.from_range(-2.0, 2.0, 0.5)
        assert g.count == 9
        assert g.hi == 2.0
        np.testing.assert_allclose(g.points, np.linspace(-2, 2, 9))

    def test_refine_keeps_endpoints(self):
        g = Grid.from_range(0.0, 1.0, 0.25).refine()
        assert g.count == 9 and g.hi == 1.0

    @pytest.mark.parametrize("args", [(0.0, 1.0, 0.3), (1.0, 0.0, 0.5), (0.0, 1.0, -0.1)])
    def test_bad_ranges(self, args):
        with pytest.raises(ValueError):
            Grid.from_range(*args)


class TestShells:
    def test_hand_values(self):
        f = AlternatingShellsBothSided(3.0)
        assert eval_at(f, -1.0) == 1.0
        assert eval_at(f, 5.0) == 0.0
        assert eval_at(f, -2.0) == 1.0
        assert eval_at(f, -3.0) == 0.0  # right-closed shells: -3 belongs to the gap (-9, -3]
        assert eval_at(f, -10.0) == -1.0
        assert eval_at(f, -0.2) == -1.0
        assert eval_at(f, 0.0) == 0.0

    @pytest.mark.parametrize("a", [2.0, 3.0, 4.5])
    @pytest.mark.parametrize("j", range(-5, 6))
    def test_dilation_identity(self, a, j):
        f = AlternatingShellsBothSided(a)
        # interiors of shells k = -2 .. 2
        t = -np.array([a ** (2 * k) * (1 + 0.37 * (a - 1)) for k in range(-2, 3)])
        assert np.array_equal(f(a ** (2 * j) * t), (-1.0) ** j * f(t))

    def test_unit_support(self):
        f = AlternatingShellsUnit(3.0)
        t = np.linspace(-3, 1, 4001)
        v = f(t)
        assert np.all(v[(t < -1) | (t >= 0)] == 0)
        assert set(np.unique(v)) <= {-1.0, 0.0, 1.0}
        assert eval_at(f, -0.5) == 1.0
        assert eval_at(f, -0.1) == -1.0
        assert eval_at(f, -0.2) == 0.0

    @pytest.mark.parametrize("cls", [AlternatingShellsBothSided, AlternatingShellsUnit])
    def test_pieces_reproduce_values(self, cls):
        f = cls(2.5)
        pieces = f.pieces(-50.0, -1e-3)
        rng = np.random.default_rng(0)
        t = -np.exp(rng.uniform(np.log(1e-3), np.log(50.0), 500))
        expect = np.zeros_like(t)
        for c, d, v in pieces:
            expect[(t > c) & (t <= d)] += v
        assert np.array_equal(f(t), expect)

    def test_rejects_base(self):
        with pytest.raises(ValueError):
            AlternatingShellsBothSided(1.0)


class TestVariants:
    def test_indicator_half_open(self):
        f = Indicator(0.0, 1.0)
        assert list(f(np.array([0.0, 0.5, 1.0, 1.5]))) == [0.0, 1.0, 1.0, 0.0]

    def test_bump(self):
        b = SmoothBump(0.5, 2.0)
        assert eval_at(b, 0.5) == 1.0
        assert eval_at(b, 2.5) == 0.0 and eval_at(b, -1.6) == 0.0
        t = np.linspace(-1.4, 2.4, 7)
        h = 1e-6
        fd = (b(t + h) - b(t - h)) / (2 * h)
        np.testing.assert_allclose(b.derivative(t), fd, atol=1e-8)

    def test_grid_sampled_left_closed_cells(self):
        g = Grid.from_range(0.0, 1.0, 0.25)
        f = GridSampled(g, [1.0, 2.0, 3.0, 4.0, 5.0])
        assert list(f(np.array([-0.1, 0.0, 0.2, 0.25, 0.99, 1.0, 1.01]))) == [0, 1, 1, 2, 4, 5, 0]

    def test_combination_and_shift(self):
        f = Combination([(2.0, Indicator(0, 1)), (-1.0, Constant(0.5))])
        assert eval_at(f, 0.5) == 1.5
        s = Shifted(Indicator(0, 1), 2.0)
        assert eval_at(s, 2.5) == 1.0 and eval_at(s, 0.5) == 0.0
        assert s.pieces(-10, 10) == [(2.0, 3.0, 1.0)]

    def test_eval_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            eval_at(Constant(1.0), math.inf)


class TestNorms:
    def test_constant_unit_mass(self):
        g = Grid.from_range(0.0, 1.0, 0.01)
        assert lp_weighted_norm(Constant(1.0), 2.0, None, g) == pytest.approx(1.0, abs=1e-12)

    def test_indicator_l2(self):
        g = Grid.from_range(-2.0, 2.0, 0.01)
        assert lp_weighted_norm(Indicator(0, 1), 2.0, None, g) == pytest.approx(1.0, abs=1e-9)

    def test_exponential_weight(self):
        g = Grid.from_range(-2.0, 2.0, 1e-5)
        val = lp_weighted_norm(Indicator(0, 1), 1.0, np.exp(-g.points), g)
        assert val == pytest.approx(1 - math.exp(-1), abs=1e-5)

    def test_rejects_small_p(self):
        g = Grid.from_range(0.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            lp_weighted_norm(Constant(1.0), 0.5, None, g)

    @given(st.floats(-5, 5), st.sampled_from([1.0, 1.5, 2.0, 4.0]))
    def test_homogeneity(self, c, p):
        g = Grid.from_range(-1.0, 2.0, 0.01)
        f = SmoothBump(0.3, 1.1)(g.points) + Indicator(0.5, 1.5)(g.points)
        w = np.exp(-g.points)
        assert lp_weighted_norm(c * f, p, w, g) == pytest.approx(abs(c) * lp_weighted_norm(f, p, w, g), rel=1e-13, abs=1e-300)

    def test_weak_profile_examples(self):
        g = Grid.from_range(-2.0, 2.0, 1e-3)
        ind = Indicator(0, 1)(g.points)
        prof = weak_l1_profile(ind, None, [0.5, 1.5], g)
        np.testing.assert_allclose(prof[:, 1], [1.0, 0.0], atol=1e-9)
        tent = np.maximum(1 - np.abs(g.points), 0)
        assert weak_l1_profile(tent, None, [0.5], g)[0, 1] == pytest.approx(1.0, abs=2e-3)

    def test_weak_profile_rejects(self):
        g = Grid.from_range(0.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            weak_l1_profile(np.ones(g.count), None, [0.0, 1.0], g)
        with pytest.raises(ValueError):
            weak_l1_profile(np.ones(g.count), None, [2.0, 1.0], g)

    @given(st.lists(st.floats(-10, 10), min_size=5, max_size=60), st.lists(st.floats(0.01, 10), min_size=1, max_size=8, unique=True))
    def test_weak_profile_monotone(self, vals, lams):
        vals = np.array(vals)
        g = Grid(0.0, 0.1, vals.size)
        prof = weak_l1_profile(vals, np.linspace(0.5, 2, vals.size), sorted(lams), g)
        assert np.all(np.diff(prof[:, 1]) <= 0)

    def test_bmo_constant(self):
        assert bmo_seminorm(np.full(33, 4.2)) == 0.0

    def test_bmo_step(self):
        g = Grid.from_range(-1.0, 1.0, 2.0 / 256)
        assert bmo_seminorm(Indicator(0.0, math.inf)(g.points)) == pytest.approx(0.5, abs=1e-4)

    def test_bmo_alternating(self):
        v = (-1.0) ** np.arange(1025)
        assert bmo_seminorm(v) == pytest.approx(1.0, abs=1e-12)

    def test_bmo_agrees_with_brute_force_on_dyadic_windows(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=65)
        cells = v[:-1]
        best = 0.0
        for length in (2, 4, 8, 16, 32, 64):
            for s in range(0, 64 - length + 1):
                w = cells[s : s + length]
                best = max(best, np.abs(w - w.mean()).mean())
        # dyadic-offset windows lose at most a bounded factor against all offsets
        assert best / 2 <= bmo_seminorm(v) <= best + 1e-15

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=80), st.floats(-1e3, 1e3))
    def test_bmo_shift_invariant(self, vals, c):
        v = np.array(vals)
        assert bmo_seminorm(v + c) == pytest.approx(bmo_seminorm(v), abs=1e-12 * (1 + abs(c) + np.abs(v).max()))
