import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_values import FOUR_POINT_RATIO, FOUR_TANH_12, TANH_1, TANH_2
from selfrepel import tilt
from selfrepel.errors import DomainError


def test_tilted_moment_examples():
    assert tilt.tilted_cross_moment(tilt.SymmetricMeasure.two_point(1.0), 1.0).value == pytest.approx(TANH_1)
    assert tilt.tilted_cross_moment(tilt.SymmetricMeasure.two_point(2.0), 0.3).value == pytest.approx(FOUR_TANH_12)
    zero = tilt.tilted_cross_moment(tilt.SymmetricMeasure([0.0], [1.0]), 1.0)
    assert zero.value == 0.0 and zero.degenerate


def test_tanh_bound_examples():
    b = tilt.tanh_lower_bound(1.0, 2.0)
    assert b.value == pytest.approx(TANH_2) and b.certified
    assert not tilt.tanh_lower_bound(1.0, 2.5).certified


def test_four_point_examples():
    assert tilt.four_point_ratio(tilt.FourPointMeasure(1.0, 1.0, 0.3), 1.0) == pytest.approx(TANH_1)
    m = tilt.FourPointMeasure(0.5, math.sqrt(1.75), 0.5)
    assert m.variance() == pytest.approx(1.0)
    assert tilt.four_point_ratio(m, 1.0) == pytest.approx(FOUR_POINT_RATIO, rel=1e-14)


def test_symmetric_measure_validation():
    with pytest.raises(DomainError):
        tilt.SymmetricMeasure([1.0, -2.0], [0.5, 0.5])
    with pytest.raises(DomainError):
        tilt.SymmetricMeasure([1.0, -1.0], [0.5, 0.4])


@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.01, 0.99), st.floats(0.0, 2.0))
def test_four_point_swap_symmetry(x, y, p, beta):
    # p/2 on +-a and (1-p)/2 on +-b is the same law with the roles swapped
    a, b = sorted((x, y))
    r1 = tilt._ratio(a, b, p, beta)
    r2 = tilt._ratio(b, a, 1 - p, beta)
    assert r1 == pytest.approx(r2, rel=1e-12)


@given(
    st.lists(st.floats(0.01, 3.0), min_size=1, max_size=6),
    st.lists(st.floats(0.01, 1.0), min_size=6, max_size=6),
    st.floats(0.0, 0.5),
    st.floats(0.01, 1.0),
)
def test_tanh_bound_property(pos, raw_mass, zero, frac):
    mass = np.array(raw_mass[: len(pos)])
    mass = (1 - zero) * mass / mass.sum()
    theta = tilt.SymmetricMeasure.from_pairs(pos, mass, zero)
    m2 = theta.second_moment()
    beta = frac * 2.0 / m2
    lhs = tilt.tilted_cross_moment(theta, beta).value
    assert lhs >= m2 * math.tanh(beta * m2) - 1e-9


def test_randomized_trials_pass():
    summary = tilt.tanh_bound_trials(300, 6, np.random.default_rng(5))
    assert summary.passed and summary.trials == 300


@pytest.mark.parametrize("V,beta", [(1.0, 1.0), (1.0, 2.0), (0.5, 4.0), (1.5, 0.5)])
def test_four_point_minimum(V, beta):
    res = tilt.minimize_four_point(V, beta)
    assert res.value == pytest.approx(V * math.tanh(beta * V), abs=1e-4)
    assert res.slack >= -1e-9
    h = 1e-3 * V
    assert abs(res.measure.a - V) <= 2 * h and abs(res.measure.b - V) <= 2 * h


def test_four_point_domain():
    with pytest.raises(DomainError):
        tilt.minimize_four_point(1.0, 2.5)
    with pytest.raises(DomainError):
        tilt.minimize_four_point(1.0, 1.0, h=0.01)


def test_convexity_certificate():
    grid = np.arange(1, 41) * 0.1
    for beta in (1.0, 1.9):
        rep = tilt.convexity_certificate(1.0, beta, grid)
        assert rep.passed and abs(rep.k_at_V) <= 1e-10
    with pytest.raises(DomainError):
        tilt.convexity_certificate(1.0, 1.0, [0.0, 1.0, 2.0])


@given(st.floats(0.1, 5.0), st.floats(0.0, 3.0))
def test_k_vanishes_at_V(V, beta):
    assert tilt.k_function(V, V, beta) == pytest.approx(0.0, abs=1e-10 * max(1.0, V * math.cosh(beta * V)))


def test_block_covariance():
    for T, alpha in ((8, 0.5), (8, 1.0)):
        rep = tilt.block_covariance_check(T, alpha, 0.5)
        assert rep.certified and rep.passed
    zero = tilt.block_covariance_check(8, 0.0, 0.5)
    assert zero.cross_moment == pytest.approx(0.0, abs=1e-12) and zero.bound == 0.0
    with pytest.raises(DomainError):
        tilt.block_covariance_check(8, 1.0, 0.5, gamma=4)


def test_split_spec_structure():
    spec = tilt.split_spec(4, 1.0, 0.5)
    pairs = {(i, j): w for i, j, w in spec.pairs()}
    assert pairs[(0, 4)] == 2.0
    assert (1, 3) not in pairs and (0, 2) in pairs and (2, 4) in pairs


def test_random_search_harness_finds_no_violation():
    assert tilt.random_measure_search(1.0, 1.5, 200, rng=np.random.default_rng(0)) >= -1e-9
