import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_values import ALPHA_STAR_05, ALPHA_STAR_09, C_CRIT, V2, V3
from selfrepel import multiscale as ms
from selfrepel.errors import DomainError


def test_constants():
    assert ms.c_crit() == pytest.approx(C_CRIT, abs=1e-15)
    assert ms.alpha_star(0.5) == pytest.approx(ALPHA_STAR_05, rel=1e-13)
    assert ms.alpha_star(0.9) == pytest.approx(ALPHA_STAR_09, rel=1e-12)
    assert ms.theorem2_exponent() == 1.0 + ms.c_crit()
    assert ms.saturated_gain(ms.c_crit()) == pytest.approx(1.0)


def test_alpha_star_domain():
    for c in (0.0, -0.1, 0.98, 1.2):
        with pytest.raises(DomainError):
            ms.alpha_star(c)


def test_recursion_examples():
    states = ms.iterate_recursion(2.0, 0.5, 10)
    assert [s.n for s in states] == list(range(1, 11))
    assert states[0].V == 1.0
    assert states[1].V == pytest.approx(V2, rel=1e-14)
    assert states[2].V == pytest.approx(V3, rel=1e-14)


def test_long_runs_stay_finite_in_log():
    states = ms.iterate_recursion(3.0, 0.2, 5000)
    assert math.isfinite(states[-1].log_V)
    assert states[-1].V == math.inf
    r = (states[-1].log_V - states[-2].log_V) / math.log(2)
    assert r == pytest.approx(ms.c_crit(), abs=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.05, 8.0))
def test_classification_matches_threshold(c, alpha):
    a_star = ms.alpha_star(c)
    if abs(alpha - a_star) < 1e-6 * a_star:
        return
    pt = ms.classify_phase(alpha, c)
    assert pt.classification == ("divergent" if alpha > a_star else "bounded")
    assert pt.iteration_agrees is not False


def test_divergent_ratio_converges():
    for alpha, c in ((1.0, 0.3), (4.0, 0.9)):
        states = ms.iterate_recursion(alpha, c, 101)
        r = (states[-1].log_V - states[-2].log_V) / math.log(2)
        assert abs(r - ms.c_crit()) <= 1e-6


@given(st.floats(0.05, 0.9), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_recursion_monotone_in_alpha(c, a1, a2):
    lo, hi = sorted((a1, a2))
    v_lo = ms.iterate_recursion(lo, c, 30)[-1].log_V
    v_hi = ms.iterate_recursion(hi, c, 30)[-1].log_V
    assert v_hi >= v_lo - 1e-12


def test_phase_diagram_grid_order():
    pts = ms.phase_diagram([0.5, 2.0], [0.2, 0.6, 0.9])
    assert [(p.alpha, p.c) for p in pts] == [(a, c) for a in (0.5, 2.0) for c in (0.2, 0.6, 0.9)]


def test_exponent_estimate_approaches_saturated_limit():
    e60 = ms.msd_exponent_estimate(2.0, 0.5, 60)
    e600 = ms.msd_exponent_estimate(2.0, 0.5, 600)
    assert e60 < e600 < ms.theorem2_exponent()
    assert e600 == pytest.approx(ms.theorem2_exponent(), abs=0.01)


def test_effective_coupling_heuristic():
    ce = ms.effective_coupling_exponent(2, 4.0)
    assert (ce.s, ce.xi_c, ce.label) == (2.0, 4.0, "HEURISTIC")
    assert ce.convergent
    assert not ms.effective_coupling_exponent(2, 1.5).convergent
    with pytest.raises(DomainError):
        ms.effective_coupling_exponent(3, 2.0)


def test_unclamped_variant_grows_faster():
    clamped = ms.iterate_recursion(5.0, 0.3, 20)[-1].log_V
    free = ms.iterate_recursion(5.0, 0.3, 20, clamp=False)[-1].log_V
    assert free >= clamped
