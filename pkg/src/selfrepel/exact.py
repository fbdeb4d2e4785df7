"""Exact expectations by enumerating all ``2**(d*T)`` increment configurations.

Configurations are integers whose bit ``(k-1)*d + (p-1)`` is set when
``phi[k, p] = +a``.  Energies are produced in Gray-code order: consecutive
configurations differ in one increment, so each energy is the previous one
plus an O(pairs touching that step) flip correction.  The Gray sequence is
cut into fixed segments of ``2**SEGMENT_BITS`` configurations whose first
energy is recomputed from scratch, so the energy array (and every result
derived from it) is the same whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from collections import OrderedDict
from typing import Sequence

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError, NumericError
from .model import (
    GibbsSpec,
    _apply_flip,
    _delta_flip,
    _energies_from_codes,
    _full_energy,
    compile_energy,
)
from .observables import (
    EndpointSquare,
    Observable,
    PairEqualIndicator,
    WindowAllEqualIndicator,
)

MAX_SPINS = 24
SEGMENT_BITS = 14
CHUNK = 1 << 16
AUDIT_SAMPLES = 1000
AUDIT_RTOL = 1e-9


@dataclass(frozen=True)
class ExactResult:
    value: float
    log_partition: float
    config_count: int
    audit_error: float = 0.0


@njit(cache=True, nogil=True)
def _gray_segment(start, length, T, d, a, I, J, q, coef, ptr, members, out):
    phi = np.empty((T, d))
    x = np.zeros((T + 1, d))
    code = start ^ (start >> 1)
    for k in range(T):
        for p in range(d):
            phi[k, p] = a if (code >> (k * d + p)) & 1 else -a
            x[k + 1, p] = x[k, p] + phi[k, p]
    e = _full_energy(x, I, J, q, coef)
    out[0] = e
    for r in range(1, length):
        i = start + r
        b = 0
        while (i >> b) & 1 == 0:
            b += 1
        k = b // d
        p = b - k * d
        e += _delta_flip(x, k, p, phi[k, p], ptr, members, I, J, q, coef)
        _apply_flip(phi, x, k, p)
        out[r] = e


def _check_capacity(spec: GibbsSpec):
    if spec.n_spins > MAX_SPINS:
        raise CapacityError(
            f"exact enumeration needs d*T <= {MAX_SPINS}, got d*T = {spec.n_spins}"
        )


def gray_energies(spec: GibbsSpec, workers: int = 1) -> np.ndarray:
    """Energies of all configurations, indexed by Gray rank ``r`` (code ``r ^ (r >> 1)``)."""
    _check_capacity(spec)
    ce = compile_energy(spec)
    n_conf = 1 << spec.n_spins
    seg = min(n_conf, 1 << SEGMENT_BITS)
    out = np.empty(n_conf)
    args = (spec.T, spec.d, spec.step_amplitude, ce.I, ce.J, ce.q, ce.coef, ce.ptr, ce.members)

    def run(start):
        _gray_segment(start, seg, *args, out[start : start + seg])

    starts = range(0, n_conf, seg)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    else:
        for s in starts:
            run(s)
    return out


def gray_codes(lo: int, hi: int) -> np.ndarray:
    r = np.arange(lo, hi, dtype=np.int64)
    return r ^ (r >> 1)


def spins_from_codes(codes: np.ndarray, T: int, d: int, a: float = 1.0) -> np.ndarray:
    """Increment arrays of shape ``(len(codes), T, d)``."""
    bits = (codes[:, None] >> np.arange(T * d, dtype=np.int64)) & 1
    return (a * (2 * bits - 1)).reshape(len(codes), T, d).astype(float)


def _audit(spec: GibbsSpec, energies: np.ndarray) -> float:
    """Compare incremental energies with from-scratch ones on random configurations."""
    n_conf = energies.size
    rng = np.random.default_rng(int(spec.spec_hash(), 16))
    ranks = rng.integers(0, n_conf, size=min(AUDIT_SAMPLES, n_conf))
    ce = compile_energy(spec)
    fresh = _energies_from_codes(
        ranks ^ (ranks >> 1), spec.T, spec.d, spec.step_amplitude, ce.I, ce.J, ce.q, ce.coef
    )
    err = float(np.max(np.abs(fresh - energies[ranks]), initial=0.0))
    scale = float(np.max(np.abs(energies), initial=0.0))
    if not err <= AUDIT_RTOL * (1.0 + scale):
        raise NumericError(f"Gray-code energy drift {err:.3e} exceeds tolerance at scale {scale:.3e}")
    return err


_CACHE: "OrderedDict[GibbsSpec, tuple]" = OrderedDict()
_CACHE_SIZE = 4


def _enumerate(spec: GibbsSpec, workers: int):
    energies = gray_energies(spec, workers=workers)
    if not np.all(np.isfinite(energies)):
        raise NumericError("non-finite energy encountered during enumeration")
    audit = _audit(spec, energies)
    logw = spec.alpha * energies
    shift = float(np.max(logw))
    w = np.exp(logw - shift)
    total = float(np.sum(w))
    log_z = shift + math.log(total) - spec.n_spins * math.log(2.0)
    if not math.isfinite(log_z):
        raise NumericError("log partition function is not finite")
    w.setflags(write=False)
    return w, total, log_z, audit


def _weights(spec: GibbsSpec, workers: int = 1):
    """Normalized-by-max Gibbs weights in Gray order, cached per spec."""
    _check_capacity(spec)
    hit = _CACHE.get(spec)
    if hit is None:
        hit = _enumerate(spec, max(1, int(workers)))
        _CACHE[spec] = hit
        while len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    else:
        _CACHE.move_to_end(spec)
    return hit


def expectations(
    spec: GibbsSpec, observables: Sequence[Observable], workers: int = 1
) -> list[ExactResult]:
    """Exact Gibbs expectations of several observables from one enumeration."""
    for obs in observables:
        obs.validate(spec.T, spec.d)
    w, total, log_z, audit = _weights(spec, workers)
    n_conf = w.size
    acc = np.zeros(len(observables))
    for lo in range(0, n_conf, CHUNK):
        hi = min(lo + CHUNK, n_conf)
        phi = spins_from_codes(gray_codes(lo, hi), spec.T, spec.d, spec.step_amplitude)
        wc = w[lo:hi]
        for n, obs in enumerate(observables):
            acc[n] += np.sum(wc * obs.values(phi))
    vals = acc / total
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite expectation")
    return [ExactResult(float(v), log_z, n_conf, audit) for v in vals]


def expectation(spec: GibbsSpec, obs: Observable, workers: int = 1) -> ExactResult:
    """Exact ``E[obs]`` under the Gibbs measure of ``spec``."""
    return expectations(spec, [obs], workers)[0]


def log_partition(spec: GibbsSpec) -> float:
    """``log E_P[exp(alpha * energy)]`` relative to the unweighted walk."""
    return _weights(spec, 1)[2]


def probabilities(spec: GibbsSpec) -> np.ndarray:
    """Gibbs probability of every configuration, indexed by configuration code."""
    w, total, _, _ = _weights(spec, 1)
    out = np.empty_like(w)
    out[gray_codes(0, w.size)] = w / total
    return out


def pair_equal_prob(spec: GibbsSpec, j: int) -> float:
    """``P(phi_j = phi_{j+1})`` for a one-dimensional walk."""
    if spec.d != 1:
        raise DomainError("pair_equal_prob is defined for d = 1")
    if not 1 <= j < spec.T:
        raise DomainError(f"need 1 <= j < T = {spec.T}, got j = {j}")
    return expectation(spec, PairEqualIndicator(j, j + 1)).value


def window_all_equal_prob(spec: GibbsSpec, i: int, w: int) -> float:
    """``P(phi_i = ... = phi_{i+w-1})`` for a one-dimensional walk."""
    if spec.d != 1:
        raise DomainError("window_all_equal_prob is defined for d = 1")
    if w < 1 or i < 1 or i + w - 1 > spec.T:
        raise DomainError(f"window starting at {i} of length {w} does not fit in T = {spec.T}")
    return expectation(spec, WindowAllEqualIndicator(i, i + w - 1)).value


def msd_per_step(spec: GibbsSpec, workers: int = 1) -> float:
    """``E[||x_T||**2] / (d * T)``."""
    return expectation(spec, EndpointSquare(), workers).value / (spec.d * spec.T)

