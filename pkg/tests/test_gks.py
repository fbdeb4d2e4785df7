import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_values import TANH_1
from selfrepel import gks
from selfrepel.errors import CapacityError, CertificationError, ContractError, DomainError
from selfrepel.model import CoefficientTable, GibbsSpec, SpinPath, nearest_neighbor_quadratic
from selfrepel.observables import Monomial


def test_phi_power_examples():
    p = gks.expand_phi_power_minus_square(2, 4)
    assert p.terms == {0: Fraction(1), 0b11: Fraction(1)}
    assert p.coefficient([1, 2]) == 1 and p.coefficient([]) == 1
    for N in (1, 3, 7):
        assert gks.expand_phi_power_minus_square(N, 2).is_zero()


def test_phi_power_suite_nonnegative():
    rep = gks.phi_power_suite(range(2, 9), (4, 6))
    assert rep.passed and len(rep.records) == 14
    assert all(r.slack >= 0 for r in rep.records)


def test_phi_power_capacity():
    with pytest.raises(CapacityError):
        gks.expand_phi_power_minus_square(13, 4)
    with pytest.raises(CapacityError):
        gks.expand_phi_power_minus_square(4, 10)
    with pytest.raises(DomainError):
        gks.expand_phi_power_minus_square(4, 3)


@given(st.integers(1, 6), st.sampled_from([2, 4, 6]), st.data())
def test_phi_power_evaluates_to_definition(N, gamma, data):
    signs = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=N, max_size=N))
    S2 = Fraction(sum(signs) ** 2, N)
    expected = S2 ** (gamma // 2) - S2
    assert gks.expand_phi_power_minus_square(N, gamma).evaluate(signs) == expected


@given(st.integers(1, 5), st.data())
def test_spin_polynomial_algebra(n, data):
    signs = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    s = gks.SpinPolynomial.spin_sum(n)
    k = data.draw(st.integers(1, n))
    x = gks.SpinPolynomial.spin(n, k)
    prod = (s + x) * (s - x)
    assert prod.evaluate(signs) == (sum(signs) + signs[k - 1]) * (sum(signs) - signs[k - 1])
    assert (x * x).terms == {0: Fraction(1)}
    assert (s**3).evaluate(signs) == sum(signs) ** 3


def test_lag_polynomial_matches_potential():
    pot = CoefficientTable(2, {(1, 3): 0.5, (2, 3): 0.25})
    poly = gks.lag_polynomial(pot, 3)
    for code in range(8):
        path = SpinPath.from_code(code, 3)
        z = path.positions[-1, 0]
        assert float(poly.evaluate(path.increments[:, 0].astype(int))) == pytest.approx(pot.evaluate([z], 3))


def test_signed_potential_admissibility():
    signed = CoefficientTable(2, {(1, 2): -1.0, (2, 2): 1.0}, signed=True)
    assert gks.signed_potential_admissible(signed, step_amplitude=1.0).admissible
    assert not gks.signed_potential_admissible(signed, step_amplitude=0.4).admissible
    bad = GibbsSpec(1, 4, 0.5, signed, 0.4)
    with pytest.raises(DomainError):
        gks.check_gks_pair(bad, Monomial.of(1), Monomial.of(2))


def test_gks_pair_examples():
    spec = GibbsSpec(1, 2, 0.5, nearest_neighbor_quadratic())
    assert gks.check_gks_pair(spec, Monomial.of(1), Monomial.of(2)) == pytest.approx(TANH_1, abs=1e-12)
    free = spec.replace(alpha=0.0, T=6)
    assert gks.check_gks_pair(free, Monomial.of(1, 2), Monomial.of(3, 5)) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(CapacityError):
        gks.check_gks_pair(GibbsSpec(1, 21, 0.1, nearest_neighbor_quadratic()), Monomial.of(1), Monomial.of(2))


def test_omission_examples():
    pot = nearest_neighbor_quadratic()
    M = GibbsSpec(1, 2, 0.5, pot, interaction_set=((0, 2),))
    empty = GibbsSpec(1, 2, 0.5, pot, interaction_set=())
    f = Monomial.of(1, 2)
    assert gks.check_omission_monotonicity(M, empty, f) == pytest.approx(TANH_1, abs=1e-12)
    assert gks.check_omission_monotonicity(M, M, f) == 0.0
    with pytest.raises(ContractError):
        gks.check_omission_monotonicity(empty, M, f)
    with pytest.raises(ContractError):
        gks.check_omission_monotonicity(M, M.replace(alpha=0.4), f)


def test_ballistic_examples():
    lin = CoefficientTable(1, {(1, 2): 1.0})
    two = gks.check_ballistic(GibbsSpec(1, 2, 1.0, lin))
    assert two.mean_endpoint == pytest.approx(2 * TANH_1, abs=1e-12)
    mean, per_step = gks.check_ballistic(GibbsSpec(1, 8, 1.0, lin))
    assert per_step >= TANH_1 - 1e-9
    zero = gks.check_ballistic(GibbsSpec(1, 6, 0.0, lin))
    assert zero.mean_endpoint == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        gks.check_ballistic(GibbsSpec(1, 4, 1.0, nearest_neighbor_quadratic()))


def test_ballistic_field_general():
    pot = CoefficientTable(1, {(1, 2): 0.5, (3, 2): 0.25, (2, 2): 1.0})
    assert gks.ballistic_field(pot, 1.0) == pytest.approx(0.5 + 0.25 * 4)
    res = gks.check_ballistic(GibbsSpec(1, 6, 0.4, pot))
    assert res.passed and res.bound == pytest.approx(math.tanh(0.4 * 1.5))


def test_dim_reduction_examples():
    quad = CoefficientTable(2, {(1, 2): 1.0})
    assert gks.check_dim_reduction(GibbsSpec(2, 4, 0.3, quad)) == pytest.approx(0.0, abs=1e-10)
    quartic = CoefficientTable(2, {(2, 2): 1.0})
    assert gks.check_dim_reduction(GibbsSpec(2, 3, 0.2, quartic)) >= -1e-9
    assert gks.check_dim_reduction(GibbsSpec(2, 3, 0.0, quartic)) == pytest.approx(0.0, abs=1e-12)


def test_gamma_reduction_nonnegative():
    for gamma in (4, 6):
        assert gks.check_gamma_reduction(8, 0.5, gamma, 0.5) >= -1e-9


def test_suites_and_replay():
    pairs = gks.gks_pair_suite(40, T_max=8, seed=3)
    omit = gks.omission_suite(20, T_max=6, seed=4)
    assert pairs.passed and omit.passed
    for rec in pairs.records[:5] + omit.records[:5]:
        assert gks.replay_record(rec.replay) == rec.slack
        json.loads(rec.to_json())
    assert len(pairs.jsonl().splitlines()) == 40


def test_suites_are_reproducible():
    a = gks.gks_pair_suite(30, seed=11)
    b = gks.gks_pair_suite(30, seed=11, workers=2)
    assert [r.slack for r in a.records] == [r.slack for r in b.records]
    assert [r.spec_hash for r in a.records] == [r.spec_hash for r in b.records]


def test_failure_raises_with_replay(monkeypatch):
    monkeypatch.setattr(gks, "check_gks_pair", lambda *a, **k: -1.0)
    with pytest.raises(CertificationError) as info:
        gks.gks_pair_suite(3, seed=0)
    assert "spec" in info.value.replay
    rep = gks.gks_pair_suite(3, seed=0, abort=False)
    assert not rep.passed and rep.min_slack == -1.0


@given(st.integers(2, 6), st.floats(0.0, 1.0), st.data())
def test_gks_on_random_tables(T, alpha, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    spec = GibbsSpec(1, T, alpha, gks.random_table(rng, T))
    f = gks.random_monomial(rng, T, 1)
    g = gks.random_monomial(rng, T, 1)
    assert gks.check_gks_pair(spec, f, g) >= -1e-9
