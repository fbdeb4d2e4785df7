import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selfrepel.errors import DomainError
from selfrepel.model import (
    CoefficientTable,
    GibbsSpec,
    PowerLaw,
    SpinPath,
    compile_energy,
    delta_energy_flip,
    energies_for_codes,
    energy,
    evaluate_W,
    nearest_neighbor_quadratic,
    potential_from_dict,
)


def brute_energy(signs, spec):
    x = np.concatenate([np.zeros((1, spec.d)), np.cumsum(spec.step_amplitude * np.asarray(signs, float), 0)])
    return sum(w * spec.potential.evaluate(x[j] - x[i], j - i) for i, j, w in spec.pairs())


def test_evaluate_w_examples():
    assert evaluate_W([2.0], 2, nearest_neighbor_quadratic()) == 4.0
    assert evaluate_W([2.0], 1, nearest_neighbor_quadratic()) == 0.0
    assert evaluate_W([0.0], 3, PowerLaw(4, 1.0)) == 0.0
    assert evaluate_W([3.0], 3, PowerLaw(2, 2.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        evaluate_W([1.0], 0, PowerLaw(2, 2.0))


def test_energy_examples():
    nn = GibbsSpec(1, 2, 1.0, nearest_neighbor_quadratic())
    up = SpinPath.from_signs([[1], [1]])
    assert energy(up, nn) == 4.0
    assert energy(SpinPath.from_signs([[1], [-1]]), nn) == 0.0
    assert delta_energy_flip(up, 2, 1, nn) == -4.0
    pl = GibbsSpec(1, 3, 1.0, PowerLaw(2, 2.0))
    assert energy(SpinPath.from_signs([[1], [1], [1]]), pl) == pytest.approx(6.0)


def test_spec_validation():
    with pytest.raises(DomainError):
        GibbsSpec(1, 0, 1.0, nearest_neighbor_quadratic())
    with pytest.raises(DomainError):
        GibbsSpec(1, 3, -1.0, nearest_neighbor_quadratic())
    with pytest.raises(DomainError):
        GibbsSpec(1, 3, 1.0, nearest_neighbor_quadratic(), interaction_set=((0, 4),))
    with pytest.raises(DomainError):
        CoefficientTable(2, {(1, 2): -1.0})
    with pytest.raises(DomainError):
        PowerLaw(3, 1.0)


def test_spec_roundtrip_and_hash():
    spec = GibbsSpec(2, 5, 0.3, CoefficientTable(2, {(1, 2): 0.5, (2, 3): 0.25}), 0.7, ((0, 2), (1, 5, 2.0)))
    again = GibbsSpec.from_dict(spec.to_dict())
    assert again == spec
    assert again.spec_hash() == spec.spec_hash()
    assert spec.replace(alpha=0.4).spec_hash() != spec.spec_hash()
    assert potential_from_dict(PowerLaw(2, 1.5).to_dict()) == PowerLaw(2, 1.5)


def test_spin_path_codes_roundtrip():
    for code in range(64):
        assert SpinPath.from_code(code, 3, 2).code() == code


potentials = st.sampled_from(
    [
        nearest_neighbor_quadratic(),
        CoefficientTable(2, {(1, 1): 0.3, (1, 2): 1.0, (2, 3): 0.2}),
        CoefficientTable(1, {(1, 2): 1.0, (3, 1): 0.5}),
        PowerLaw(2, 1.5),
        PowerLaw(4, 2.5),
    ]
)


@given(
    potentials,
    st.integers(1, 8),
    st.integers(1, 2),
    st.sampled_from([1.0, 0.5, 2.0]),
    st.data(),
)
def test_delta_flip_matches_recomputation(pot, T, d, a, data):
    spec = GibbsSpec(d, T, 1.0, pot, a)
    signs = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=T * d, max_size=T * d))).reshape(T, d)
    path = SpinPath.from_signs(signs, a)
    k = data.draw(st.integers(1, T))
    p = data.draw(st.integers(1, d))
    e0 = energy(path, spec)
    assert e0 == pytest.approx(brute_energy(signs, spec), rel=1e-12, abs=1e-12)
    flipped = path.flipped(k, p)
    delta = delta_energy_flip(path, k, p, spec)
    assert delta == pytest.approx(energy(flipped, spec) - e0, rel=1e-10, abs=1e-10)
    assert delta + delta_energy_flip(flipped, k, p, spec) == pytest.approx(0.0, abs=1e-10)


@given(potentials, st.integers(1, 7), st.data())
def test_even_potential_energy_is_flip_symmetric(pot, T, data):
    spec = GibbsSpec(1, T, 1.0, pot)
    code = data.draw(st.integers(0, 2**T - 1))
    path = SpinPath.from_code(code, T)
    if pot.is_even():
        assert energy(-path, spec) == pytest.approx(energy(path, spec), rel=1e-12, abs=1e-12)


def test_energies_for_codes_matches_energy():
    spec = GibbsSpec(1, 6, 1.0, PowerLaw(2, 1.2), interaction_set=((0, 6, 2.0), (1, 3), (2, 5)))
    codes = np.arange(64)
    batch = energies_for_codes(spec, codes)
    ce = compile_energy(spec)
    for c in codes:
        assert batch[c] == pytest.approx(energy(SpinPath.from_code(c, 6), spec, ce))
