"""Core lattice pmf behaviour: entropy, convolution, cyclic reduction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropylab.lattice import (
    CyclicPMF,
    JointPMF,
    LatticePMF,
    convolve,
    cyclic_linear_combination,
    dilate,
    floor_divide,
    independent_product,
    joint_of,
    lattice_to_cyclic,
    linear_combination,
    mutual_information,
    shannon_entropy,
)

LN2 = math.log(2.0)


def uniform(lo, hi):
    n = hi - lo + 1
    return LatticePMF.from_dict({i: 1.0 / n for i in range(lo, hi + 1)})


def brute_convolve(p: LatticePMF, q: LatticePMF) -> dict:
    out = {}
    for x, px in zip(map(tuple, p.points.tolist()), p.masses):
        for y, py in zip(map(tuple, q.points.tolist()), q.masses):
            key = tuple(a + b for a, b in zip(x, y))
            out[key] = out.get(key, 0.0) + px * py
    return out


@st.composite
def pmf_1d(draw, max_support=6, coord=12):
    size = draw(st.integers(2, max_support))
    pts = draw(
        st.lists(st.integers(-coord, coord), min_size=size, max_size=size, unique=True)
    )
    raw = draw(
        st.lists(
            st.floats(0.05, 1.0, allow_nan=False), min_size=size, max_size=size
        )
    )
    total = sum(raw)
    return LatticePMF.from_dict({p: w / total for p, w in zip(pts, raw)})


# ---------------------------------------------------------------------------
# construction and validation


def test_pmf_is_canonically_sorted():
    p = LatticePMF([[3], [-1], [2]], [0.2, 0.5, 0.3])
    assert p.points[:, 0].tolist() == [-1, 2, 3]
    assert p.masses.tolist() == [0.5, 0.3, 0.2]


def test_pmf_rejects_bad_inputs():
    with pytest.raises(ValueError):
        LatticePMF([[0], [0]], [0.5, 0.5])  # duplicate support point
    with pytest.raises(ValueError):
        LatticePMF([[0], [1]], [0.6, 0.6])  # mass sum != 1
    with pytest.raises(ValueError):
        LatticePMF([[0], [1]], [1.2, -0.2])  # negative mass
    with pytest.raises(ValueError):
        LatticePMF(np.empty((0, 1)), np.empty(0))


def test_pmf_immutable():
    p = uniform(0, 3)
    with pytest.raises(AttributeError):
        p.masses = np.array([1.0])
    with pytest.raises(ValueError):
        p.masses[0] = 0.9


def test_from_dict_merges_scalar_and_tuple_keys():
    p = LatticePMF.from_dict({0: 0.5, (1,): 0.5})
    assert p.points.shape == (2, 1)


# ---------------------------------------------------------------------------
# entropy


def test_entropy_uniform_is_log_n():
    for n in (1, 2, 3, 8, 100):
        p = uniform(0, n - 1)
        assert shannon_entropy(p).value == pytest.approx(math.log(n), abs=1e-12)


def test_entropy_point_mass_zero():
    assert shannon_entropy(LatticePMF.point_mass((4, -2))).value == 0.0


def test_entropy_error_bar_is_small_and_nonnegative():
    p = uniform(-50, 50)
    h = shannon_entropy(p)
    assert 0.0 <= h.err < 1e-12


def test_convolved_uniform_entropy_matches_direct_summation():
    # Independent oracle: triangle weights (1,2,3,4,3,2,1)/16 summed directly.
    weights = [1, 2, 3, 4, 3, 2, 1]
    oracle = math.fsum(-(w / 16.0) * math.log(w / 16.0) for w in weights)
    assert oracle == pytest.approx(1.840748728569281, abs=1e-15)
    got = shannon_entropy(convolve(uniform(0, 3), uniform(0, 3)))
    assert got.value == pytest.approx(oracle, abs=1e-12)


@given(pmf_1d())
@settings(max_examples=60, deadline=None)
def test_entropy_bounded_by_log_support(p):
    h = shannon_entropy(p).value
    assert -1e-12 <= h <= math.log(len(p)) + 1e-12


# ---------------------------------------------------------------------------
# convolution


@given(pmf_1d(max_support=5), pmf_1d(max_support=5))
@settings(max_examples=40, deadline=None)
def test_convolve_matches_bruteforce(p, q):
    got = convolve(p, q)
    want = brute_convolve(p, q)
    assert got.as_dict().keys() == want.keys()
    for key, mass in got.as_dict().items():
        assert mass == pytest.approx(want[key], abs=1e-14)


def test_convolve_commutes():
    p = LatticePMF.from_dict({0: 0.3, 5: 0.7})
    q = LatticePMF.from_dict({-2: 0.25, 1: 0.5, 9: 0.25})
    a = convolve(p, q)
    b = convolve(q, p)
    assert np.array_equal(a.points, b.points)
    np.testing.assert_allclose(a.masses, b.masses, atol=1e-15, rtol=0)


def test_convolve_2d_bruteforce():
    p = LatticePMF.from_dict({(0, 0): 0.5, (1, 2): 0.5})
    q = LatticePMF.from_dict({(0, 1): 0.25, (-1, 0): 0.75})
    want = brute_convolve(p, q)
    got = convolve(p, q).as_dict()
    assert got.keys() == want.keys()
    for key in want:
        assert got[key] == pytest.approx(want[key], abs=1e-15)


def test_convolve_mass_renormalized():
    p = uniform(0, 40)
    out = convolve(p, p)
    assert math.fsum(out.masses) == pytest.approx(1.0, abs=1e-14)


def test_fft_and_sparse_paths_agree():
    from entropylab.lattice import _conv_fft, _conv_sparse_encoded, _row_box

    rng = np.random.default_rng(11)
    p = LatticePMF(
        np.arange(-40, 41).reshape(-1, 1), rng.dirichlet(np.ones(81))
    )
    q = LatticePMF(np.arange(0, 120).reshape(-1, 1), rng.dirichlet(np.ones(120)))
    lo = p.points.min(axis=0) + q.points.min(axis=0)
    hi = p.points.max(axis=0) + q.points.max(axis=0)
    shape = hi - lo + 1
    vol = int(shape[0])
    a = _conv_sparse_encoded(p, q, lo, shape, vol)
    b = _conv_fft(p, q, lo, shape)
    assert np.array_equal(a.points, b.points)
    np.testing.assert_allclose(a.masses, b.masses, atol=1e-12, rtol=0)


def test_independence_additivity_of_entropy():
    p = uniform(0, 5)
    q = LatticePMF.from_dict({0: 0.1, 3: 0.9})
    prod = independent_product(p, q)
    assert shannon_entropy(prod).value == pytest.approx(
        shannon_entropy(p).value + shannon_entropy(q).value, abs=1e-12
    )


# ---------------------------------------------------------------------------
# dilation and integer combinations


@given(pmf_1d(), st.sampled_from([-7, -2, -1, 2, 3, 10]))
@settings(max_examples=40, deadline=None)
def test_dilation_preserves_entropy(p, a):
    assert shannon_entropy(dilate(p, a)).value == pytest.approx(
        shannon_entropy(p).value, abs=1e-12
    )


def test_dilate_zero_rejected():
    with pytest.raises(ValueError):
        dilate(uniform(0, 1), 0)


def test_linear_combination_equals_convolution_of_dilates():
    p = uniform(0, 3)
    q = LatticePMF.from_dict({-1: 0.5, 2: 0.5})
    direct = linear_combination([p, q], [3, -2])
    manual = convolve(dilate(p, 3), dilate(q, -2))
    assert np.array_equal(direct.points, manual.points)
    np.testing.assert_allclose(direct.masses, manual.masses, atol=1e-15, rtol=0)


def test_linear_combination_skips_zero_coefficients():
    p = uniform(0, 3)
    q = uniform(0, 100)
    out = linear_combination([p, q], [1, 0])
    assert np.array_equal(out.points, p.points)
    with pytest.raises(ValueError):
        linear_combination([p, q], [0, 0])


def test_sum_entropy_dominates_marginals():
    # H(X+Y) >= max(H(X), H(Y)) for independent X, Y
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = LatticePMF(
            np.sort(rng.choice(21, size=4, replace=False)).reshape(-1, 1) - 10,
            rng.dirichlet(np.ones(4)),
        )
        q = LatticePMF(
            np.sort(rng.choice(21, size=5, replace=False)).reshape(-1, 1) - 10,
            rng.dirichlet(np.ones(5)),
        )
        hs = shannon_entropy(convolve(p, q)).value
        assert hs >= shannon_entropy(p).value - 1e-11
        assert hs >= shannon_entropy(q).value - 1e-11


# ---------------------------------------------------------------------------
# floor map


def test_floor_divide_uniform():
    p = uniform(0, 7)
    out = floor_divide(p, 2)
    assert out.as_dict() == {(0,): pytest.approx(0.25), (1,): pytest.approx(0.25),
                             (2,): pytest.approx(0.25), (3,): pytest.approx(0.25)}


def test_floor_divide_rounds_toward_minus_infinity():
    p = LatticePMF.from_dict({-3: 0.5, 3: 0.5})
    out = floor_divide(p, 2)
    assert set(map(tuple, out.points.tolist())) == {(-2,), (1,)}


def test_floor_divide_needs_positive_divisor():
    with pytest.raises(ValueError):
        floor_divide(uniform(0, 3), 0)
    with pytest.raises(ValueError):
        floor_divide(uniform(0, 3), -2)


# ---------------------------------------------------------------------------
# cyclic groups


def test_lattice_to_cyclic_wraps_mod_m():
    p = LatticePMF.from_dict({-1: 0.25, 0: 0.25, 8: 0.5})
    c = lattice_to_cyclic(p, 3)
    assert c.table[7] == pytest.approx(0.25)
    assert c.table[0] == pytest.approx(0.75)  # 0 and 8 collide mod 8


def test_cyclic_combination_matches_lattice_then_reduce():
    rng = np.random.default_rng(5)
    k = 4
    for _ in range(10):
        p = LatticePMF(rng.choice(16, size=5, replace=False).reshape(-1, 1), rng.dirichlet(np.ones(5)))
        q = LatticePMF(rng.choice(16, size=4, replace=False).reshape(-1, 1), rng.dirichlet(np.ones(4)))
        coeffs = [int(rng.integers(1, 5)), int(rng.integers(1, 5))]
        via_lattice = lattice_to_cyclic(linear_combination([p, q], coeffs), k)
        via_cyclic = cyclic_linear_combination(
            [lattice_to_cyclic(p, k), lattice_to_cyclic(q, k)], coeffs
        )
        np.testing.assert_allclose(via_cyclic.table, via_lattice.table, atol=1e-12, rtol=0)


def test_cyclic_uniform_fixed_by_any_combination():
    k = 5
    u = CyclicPMF(k, np.full(32, 1.0 / 32))
    out = cyclic_linear_combination([u, u], [3, 7])
    np.testing.assert_allclose(out.table, u.table, atol=1e-14, rtol=0)
    assert shannon_entropy(out).value == pytest.approx(k * LN2, abs=1e-12)


def test_cyclic_entropy_cannot_exceed_k_ln2():
    rng = np.random.default_rng(9)
    table = rng.dirichlet(np.ones(16))
    c = CyclicPMF(4, table)
    assert shannon_entropy(c).value <= 4 * LN2 + 1e-12


# ---------------------------------------------------------------------------
# joints and mutual information


def test_independent_joint_has_zero_mi():
    p = uniform(0, 4)
    q = LatticePMF.from_dict({0: 0.2, 1: 0.8})
    assert mutual_information(JointPMF.independent(p, q)).value == 0.0


def test_deterministic_copy_has_mi_equal_entropy():
    p = LatticePMF.from_dict({0: 0.25, 1: 0.25, 5: 0.5})
    j = joint_of(lambda x: x, p)
    assert mutual_information(j).value == pytest.approx(
        shannon_entropy(p).value, abs=1e-12
    )


def test_joint_marginals_recover_inputs():
    p = uniform(0, 3)
    q = uniform(2, 4)
    j = JointPMF.independent(p, q)
    assert np.array_equal(j.marginal_left().points, p.points)
    np.testing.assert_allclose(j.marginal_left().masses, p.masses, atol=1e-15, rtol=0)
    assert np.array_equal(j.marginal_right().points, q.points)


def test_mi_of_coarse_function_below_entropy():
    p = uniform(0, 7)
    j = joint_of(lambda x: x // 4, p)
    mi = mutual_information(j).value
    assert mi == pytest.approx(LN2, abs=1e-12)  # the top bit of 3 uniform bits
