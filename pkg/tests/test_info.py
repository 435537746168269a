"""Distances and information bounds: TV, KL, binary entropy, couplings."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropylab.grid import (
    fractional_part,
    gaussian_density,
    power_density,
    uniform_density,
)
from entropylab.info import (
    binary_entropy,
    conditional_tv_bound_check,
    int_frac_mutual_information,
    kl_divergence,
    shift_tv,
    t_information_bound,
    total_variation,
)
from entropylab.lattice import CyclicPMF, JointPMF, LatticePMF, joint_of

LN2 = math.log(2.0)


def bern(t):
    if t == 0.0:
        return LatticePMF.from_dict({0: 1.0})
    if t == 1.0:
        return LatticePMF.from_dict({1: 1.0})
    return LatticePMF.from_dict({0: 1.0 - t, 1: t})


@st.composite
def small_pmf(draw):
    size = draw(st.integers(1, 5))
    pts = draw(st.lists(st.integers(-6, 6), min_size=size, max_size=size, unique=True))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=size, max_size=size))
    tot = sum(raw)
    return LatticePMF.from_dict({p: w / tot for p, w in zip(pts, raw)})


# ---------------------------------------------------------------------------
# total variation


def test_tv_identical_zero():
    p = LatticePMF.from_dict({0: 0.5, 3: 0.5})
    assert total_variation(p, p).value == 0.0


def test_tv_disjoint_supports_is_one():
    p = LatticePMF.from_dict({0: 1.0})
    q = LatticePMF.from_dict({1: 1.0})
    assert total_variation(p, q).value == 1.0


def test_tv_hand_value():
    p = bern(0.5)
    q = bern(0.25)
    assert total_variation(p, q).value == pytest.approx(0.25, abs=1e-15)


@given(small_pmf(), small_pmf(), small_pmf())
@settings(max_examples=50, deadline=None)
def test_tv_is_a_metric(p, q, r):
    d_pq = total_variation(p, q).value
    assert d_pq == pytest.approx(total_variation(q, p).value, abs=1e-14)
    assert 0.0 <= d_pq <= 1.0
    d_pr = total_variation(p, r).value
    d_rq = total_variation(r, q).value
    assert d_pq <= d_pr + d_rq + 1e-12


def test_tv_mixed_types_rejected():
    p = LatticePMF.from_dict({0: 1.0})
    c = CyclicPMF(2, np.full(4, 0.25))
    with pytest.raises(TypeError):
        total_variation(p, c)


def test_tv_cyclic_and_joint_kinds():
    c1 = CyclicPMF(2, np.array([0.25, 0.25, 0.25, 0.25]))
    c2 = CyclicPMF(2, np.array([0.5, 0.5, 0.0, 0.0]))
    assert total_variation(c1, c2).value == pytest.approx(0.5, abs=1e-15)
    p = LatticePMF.from_dict({0: 0.5, 1: 0.5})
    j1 = JointPMF.independent(p, p)
    j2 = joint_of(lambda x: x, p)
    assert total_variation(j1, j2).value == pytest.approx(0.5, abs=1e-15)


def test_tv_grid_densities_on_different_boxes():
    f = uniform_density((0.0, 1.0), 4)
    g = uniform_density((0.5, 1.5), 4)
    assert total_variation(f, g).value == pytest.approx(0.5, abs=1e-14)


def test_shift_tv_uniform_exact():
    f = uniform_density((0.0, 1.0), 6)
    assert shift_tv(f, 0.125).value == pytest.approx(0.125, abs=1e-15)
    assert shift_tv(f, 2.0).value == 1.0  # moved clear off its own support


def test_shift_tv_gaussian_small_shift():
    f = gaussian_density(0.0, 1.0, 8.0, 8)
    small = shift_tv(f, 2.0**-6).value
    large = shift_tv(f, 0.5).value
    assert 0.0 < small < large < 1.0
    assert small < 0.01


# ---------------------------------------------------------------------------
# KL divergence


def test_kl_zero_on_equal():
    p = LatticePMF.from_dict({0: 0.3, 1: 0.7})
    assert kl_divergence(p, p).value == 0.0


def test_kl_hand_value():
    got = kl_divergence(bern(0.5), bern(0.25)).value
    want = 0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)
    assert got == pytest.approx(want, abs=1e-15)


def test_kl_support_violation_is_an_error():
    p = LatticePMF.from_dict({0: 0.5, 5: 0.5})
    q = LatticePMF.from_dict({0: 1.0})
    with pytest.raises(ValueError, match="offending"):
        kl_divergence(p, q)


def test_kl_asymmetry():
    p = bern(0.5)
    q = bern(0.1)
    assert kl_divergence(p, q).value != pytest.approx(kl_divergence(q, p).value, abs=1e-6)


@given(small_pmf())
@settings(max_examples=40, deadline=None)
def test_pinsker_against_uniform_reference(p):
    # D(p || q) >= 2 TV(p, q)^2 with q uniform on a cover of the support
    lo = int(p.points.min())
    hi = int(p.points.max())
    n = hi - lo + 1
    q = LatticePMF.from_dict({i: 1.0 / n for i in range(lo, hi + 1)})
    d = kl_divergence(p, q).value
    t = total_variation(p, q).value
    assert d >= 2.0 * t * t - 1e-12


def test_kl_grid_densities():
    # D(U || 2x) = -int ln(2x) dx = 1 - ln 2; the cell sum converges to it
    want = 1.0 - LN2
    d5 = kl_divergence(uniform_density((0.0, 1.0), 5), power_density(1.0, 5)).value
    d10 = kl_divergence(uniform_density((0.0, 1.0), 10), power_density(1.0, 10)).value
    assert abs(d10 - want) < abs(d5 - want)
    assert d10 == pytest.approx(want, abs=1e-3)


# ---------------------------------------------------------------------------
# binary entropy


def test_binary_entropy_endpoints_and_peak():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(LN2, abs=1e-15)


@given(st.floats(0.0, 1.0, allow_nan=False))
@settings(max_examples=80, deadline=None)
def test_binary_entropy_symmetric(t):
    assert binary_entropy(t) == pytest.approx(binary_entropy(1.0 - t), abs=1e-14)


def test_binary_entropy_monotone_on_left_half():
    grid = np.linspace(0.0, 0.5, 101)
    values = [binary_entropy(t) for t in grid]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_binary_entropy_domain():
    with pytest.raises(ValueError):
        binary_entropy(-0.1)
    with pytest.raises(ValueError):
        binary_entropy(1.1)


# ---------------------------------------------------------------------------
# conditional TV bound


def test_conditional_tv_bound_holds_on_random_couplings():
    rng = np.random.default_rng(17)
    for _ in range(25):
        size = int(rng.integers(3, 7))
        left = rng.integers(0, 4, size=size)
        right = (left + rng.integers(0, 2, size=size) * 4) % 8
        # force z agreement: z = value mod 4 matches by construction
        masses = rng.dirichlet(np.ones(size))
        coupling = JointPMF(left.reshape(-1, 1), right.reshape(-1, 1), masses)
        event = {int(left[0]), int(left[-1])}  # nonempty by construction
        check = conditional_tv_bound_check(coupling, lambda v: v % 4, event)
        assert check.holds
        assert check.lhs <= check.rhs + 1e-10
        assert 0.0 < check.event_probability <= 1.0


def test_conditional_tv_bound_rejects_mismatched_map():
    p = LatticePMF.from_dict({0: 0.5, 1: 0.5})
    coupling = JointPMF.independent(p, p)
    with pytest.raises(ValueError):
        conditional_tv_bound_check(coupling, lambda v: v, {0})


def test_conditional_tv_zero_probability_event():
    p = LatticePMF.from_dict({0: 0.5, 1: 0.5})
    coupling = joint_of(lambda x: x, p)
    with pytest.raises(ValueError):
        conditional_tv_bound_check(coupling, lambda v: v % 2, {7})


# ---------------------------------------------------------------------------
# information versus total variation


def test_t_information_bound_random_joints():
    rng = np.random.default_rng(4)
    for _ in range(30):
        nw, ny = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        masses = rng.dirichlet(np.ones(nw * ny))
        left = np.repeat(np.arange(nw), ny).reshape(-1, 1)
        right = np.tile(np.arange(ny), nw).reshape(-1, 1)
        joint = JointPMF(left, right, masses)
        info, bound = t_information_bound(joint, nw)
        assert info.value <= bound + 1e-10


def test_t_information_bound_binary_diagonal_equality():
    # W = Y uniform on {0,1}: I = ln 2, T = 1/2, bound = h_b(1/2) = ln 2
    p = LatticePMF.from_dict({0: 0.5, 1: 0.5})
    joint = joint_of(lambda x: x, p)
    info, bound = t_information_bound(joint, 2)
    assert info.value == pytest.approx(LN2, abs=1e-12)
    assert bound == pytest.approx(LN2, abs=1e-12)
    assert abs(info.value - bound) < 1e-9


def test_t_information_bound_validates_alphabet():
    p = LatticePMF.from_dict({i: 0.25 for i in range(4)})
    joint = joint_of(lambda x: x, p)
    with pytest.raises(ValueError):
        t_information_bound(joint, 2)  # W really has 4 values


def test_independent_joint_zero_information_zero_t():
    p = LatticePMF.from_dict({0: 0.5, 2: 0.5})
    q = LatticePMF.from_dict({0: 0.25, 1: 0.75})
    info, bound = t_information_bound(JointPMF.independent(p, q), 2)
    assert info.value == 0.0
    assert bound == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# integer/fractional split of a scaled density


def test_int_frac_mi_uniform_exactly_zero():
    f = uniform_density((0.0, 1.0), 10)
    for k in (1, 3, 6):
        assert int_frac_mutual_information(f, k).value == 0.0


def test_int_frac_mi_power_density_decreasing():
    f = power_density(1.0, 12)
    values = [int_frac_mutual_information(f, k).value for k in (2, 4, 6, 8)]
    assert all(v > 0.0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))


def test_fractional_part_tv_to_uniform_shrinks():
    # {2^k X} approaches uniform geometrically for the linear density
    f = power_density(1.0, 12)
    tvs = []
    for k in (2, 4, 6):
        frac = fractional_part(f, k)
        ref = uniform_density((0.0, 1.0), frac.resolution)
        tvs.append(total_variation(frac, ref).value)
    assert all(t <= 2.0**-k + 1e-12 for t, k in zip(tvs, (2, 4, 6)))
    assert all(a > b for a, b in zip(tvs, tvs[1:]))
    assert tvs[1] == pytest.approx(2.0**-6, abs=1e-14)
