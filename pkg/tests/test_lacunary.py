import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpoisson.exceptions import OutOfRangeError
from fracpoisson.lacunary import LacunarySpec, WindowPair, normalize, read_spec, window_indices, write_spec


def test_insertion_example():
    n = normalize(LacunarySpec(2.0, [1.0, 8.0], [0.7]))
    np.testing.assert_array_equal(n.eta, [1.0, 2.0, 8.0])
    np.testing.assert_array_equal(n.omega, [0.7, 0.7])
    assert list(n.remap[0]) == [0, 1]


def test_identity_when_already_normal():
    spec = LacunarySpec(2.0, [1.0, 3.0, 9.0], [1.0, -2.0])
    n = normalize(spec)
    np.testing.assert_array_equal(n.eta, spec.a)
    np.testing.assert_array_equal(n.omega, spec.v)


def test_ratio_exactly_rho_squared_takes_next_term():
    n = normalize(LacunarySpec(2.0, [1.0, 4.0], [1.0]))
    np.testing.assert_array_equal(n.eta, [1.0, 4.0])


def test_negative_indices_mirror_downward():
    spec = LacunarySpec(2.0, [1 / 64, 1 / 3, 1.0, 5.0], [1.0, -2.0, 3.0], j_min=-2)
    n = normalize(spec)
    # from 1/3 down to 1/64: 1/6, 1/12, 1/24 are inserted; 1/24 -> 1/64 has ratio 8/3
    np.testing.assert_allclose(n.eta[:5], [1 / 64, 1 / 24, 1 / 12, 1 / 6, 1 / 3])
    assert n.position[0] - n.k_min == list(n.eta).index(1.0)


lacunary_specs = st.builds(
    lambda rho, logs, v, j_min: LacunarySpec(
        rho, np.exp(np.cumsum([0.0] + [np.log(rho) + x for x in logs])), np.array(v[: len(logs)]), j_min
    ),
    st.floats(1.1, 4.0),
    st.lists(st.floats(0.0, 6.0), min_size=1, max_size=8),
    st.lists(st.floats(-3, 3), min_size=8, max_size=8),
    st.integers(-5, 3),
)


@given(lacunary_specs)
def test_normalization_invariants(spec):
    n = normalize(spec)
    ratios = n.eta[1:] / n.eta[:-1]
    assert np.all(ratios >= spec.rho * (1 - 1e-12))
    assert np.all(ratios <= spec.rho**2 * (1 + 1e-12))
    # every a_j survives, at its recorded position
    for j in range(spec.j_min, spec.j_max + 1):
        assert n.eta[n.position[j] - n.k_min] == spec.a_at(j)
    assert np.max(np.abs(n.omega)) == np.max(np.abs(spec.v))
    # remap partitions the eta indices carrying a layer
    ks = sorted(k for r in n.remap.values() for k in r)
    assert ks == list(range(n.k_min, n.k_min + n.omega.size))


@given(lacunary_specs)
def test_idempotent(spec):
    once = normalize(spec)
    twice = normalize(once.as_spec())
    np.testing.assert_array_equal(once.eta, twice.eta)
    np.testing.assert_array_equal(once.omega, twice.omega)


def test_window_map():
    spec = LacunarySpec(2.0, [1 / 64, 1 / 3, 1.0, 5.0, 100.0, 404.0], [1, -2, 3, -4, 5], j_min=-2)
    n = normalize(spec)
    Np = n.window((-1, 2))
    assert n.eta[Np.N1 - n.k_min] == spec.a_at(-1)
    assert n.eta[Np.N2 + 1 - n.k_min] == spec.a_at(3)


def test_omega_per_term_when_v_covers_all_terms():
    n = normalize(LacunarySpec(2.0, [1.0, 8.0], [0.7, 0.3]))
    np.testing.assert_array_equal(n.omega, [0.7, 0.7, 0.3])


class TestWindows:
    def test_small_window(self):
        spec = LacunarySpec(2.0, [1.0, 2.0, 4.0, 8.0], [1.0, 1.0, 1.0])
        assert list(window_indices(spec, WindowPair(0, 1))) == [0, 1]

    def test_centered_window(self):
        spec = LacunarySpec.geometric(2.0, -5, 5)
        assert list(window_indices(spec, (-2, 3))) == list(range(-2, 4))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            WindowPair(3, 3)

    def test_out_of_range(self):
        spec = LacunarySpec.geometric(2.0, -5, 5)
        with pytest.raises(OutOfRangeError):
            window_indices(spec, (-6, 0))
        with pytest.raises(OutOfRangeError):
            window_indices(spec, (0, 6))
        with pytest.raises(OutOfRangeError):
            spec.a_at(7)


class TestSpec:
    def test_geometric(self):
        spec = LacunarySpec.geometric(3.0, -2, 2, v=lambda j: (-1) ** (j + 1))
        assert spec.a_at(-2) == pytest.approx(1 / 9) and spec.a_at(3) == 27.0
        assert spec.v_at(0) == -1.0 and spec.v_at(1) == 1.0
        assert spec.rho == 3.0

    @pytest.mark.parametrize(
        "args",
        [
            (2.0, [1.0, 1.5], [1.0]),
            (1.0, [1.0, 2.0], [1.0]),
            (2.0, [-1.0, 2.0], [1.0]),
            (2.0, [1.0, 2.0], [1.0, 2.0, 3.0]),
            (2.0, [1.0, 2.0], [np.inf]),
        ],
    )
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            LacunarySpec(*args)

    def test_text_round_trip(self, tmp_path):
        spec = LacunarySpec(2.0, [1 / 3, 1.0, 2.5, 10.0], [0.1, -1 / 7, 3.0], j_min=-1)
        path = tmp_path / "seq.txt"
        write_spec(spec, path)
        back = read_spec(path)
        assert back == spec
        first = path.read_text().splitlines()[1]
        assert first == f"-1 {1 / 3!r} 0.1"

    def test_read_errors(self):
        with pytest.raises(ValueError):
            read_spec(io.StringIO("0 1.0 1.0\n1 2.0\n"))  # rho missing
        with pytest.raises(ValueError):
            read_spec(io.StringIO("# rho 2\n0 1.0 1\n2 4.0\n"))
