"""Single-flip Metropolis sampling of the reweighted path measure.

A proposal negates one uniformly chosen increment ``phi[k, p]``; it is
accepted with probability ``min(1, exp(alpha * dE))``, where ``dE`` is the
change of the pair energy (larger energy is favoured).

Random numbers come from numpy's PCG64.  The stream of chain ``c`` is
``np.random.Generator(np.random.PCG64(SeedSequence(seed).spawn(chains)[c]))``;
each batch of ``n`` proposals draws ``n`` site indices and then ``n``
uniforms from that stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError, NumericError
from .model import (
    GibbsSpec,
    PowerLaw,
    _apply_flip,
    _delta_flip,
    _full_energy,
    _ipow,
    compile_energy,
)
from .observables import EndpointSquare, Observable

RNG_NAME = "numpy.PCG64/SeedSequence.spawn"
MAX_SPINS = 4096
MAX_WORK = 10**11
AUDIT_INTERVAL = 100_000
AUDIT_TOL = 1e-6
BATCH_FLOATS = 1 << 22
HIST_MAX_SPINS = 20
IAT_MAX_LEN = 1 << 20

MODE_PAIRS = 0
MODE_POWER = 1


@dataclass(frozen=True)
class SamplerConfig:
    """Run lengths in sweeps; one sweep is ``d * T`` proposals."""

    sweeps: int
    burnin: int = 0
    thin: int = 1
    chains: int = 4
    seed: int = 0

    def __post_init__(self):
        for name in ("sweeps", "burnin", "thin", "chains", "seed"):
            v = getattr(self, name)
            if int(v) != v:
                raise DomainError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not self.sweeps > self.burnin >= 0:
            raise DomainError(f"need sweeps > burnin >= 0, got {self.sweeps}, {self.burnin}")
        if self.chains < 1:
            raise DomainError(f"chains must be >= 1, got {self.chains}")
        if self.thin < 1:
            raise DomainError(f"thin must be >= 1, got {self.thin}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def samples_per_chain(self) -> int:
        return (self.sweeps - self.burnin) // self.thin

    def to_dict(self) -> dict:
        return dict(sweeps=self.sweeps, burnin=self.burnin, thin=self.thin, chains=self.chains, seed=self.seed)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_samples: int
    tau_int: float
    chain_means: tuple = field(default=(), compare=True)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _power_energy(x, half_gamma, pl_coef):
    T = x.shape[0] - 1
    d = x.shape[1]
    total = 0.0
    for i in range(T):
        for j in range(i + 1, T + 1):
            s = 0.0
            for p in range(d):
                z = x[j, p] - x[i, p]
                s += z * z
            total += pl_coef[j - i] * _ipow(s, half_gamma)
    return total


@njit(cache=True, nogil=True)
def _power_delta(x, k, p, phi_kp, half_gamma, pl_coef):
    """Energy change of ``||z||**gamma / t**xi`` summed over pairs straddling step ``k``."""
    T = x.shape[0] - 1
    d = x.shape[1]
    delta = -2.0 * phi_kp
    total = 0.0
    for i in range(k + 1):
        for j in range(k + 1, T + 1):
            s = 0.0
            for pp in range(d):
                z = x[j, pp] - x[i, pp]
                s += z * z
            zp = x[j, p] - x[i, p]
            s_new = s + 2.0 * delta * zp + delta * delta
            total += pl_coef[j - i] * (_ipow(s_new, half_gamma) - _ipow(s, half_gamma))
    return total


@njit(cache=True, nogil=True)
def _energy(x, mode, I, J, q, coef, half_gamma, pl_coef):
    if mode == MODE_POWER:
        return _power_energy(x, half_gamma, pl_coef)
    return _full_energy(x, I, J, q, coef)


@njit(cache=True, nogil=True)
def _run_batch(
    phi, x, state, sites, uniforms, alpha, steps_per_snap, snaps,
    mode, ptr, members, I, J, q, coef, half_gamma, pl_coef, audit_interval,
):
    """Advance one chain through ``len(sites)`` proposals.

    ``state`` holds ``[energy, accepted, max_drift, steps_since_audit, status]``;
    ``status`` becomes 1 on a non-finite energy change.  At ``alpha = 0``
    every proposal is accepted and the energy is not tracked.
    """
    d = phi.shape[1]
    e = state[0]
    accepted = state[1]
    max_drift = state[2]
    since = state[3]
    n_snap = snaps.shape[0]
    for s in range(sites.shape[0]):
        b = sites[s]
        k = b // d
        p = b - k * d
        if alpha == 0.0:
            de = 0.0
        elif mode == MODE_POWER:
            de = _power_delta(x, k, p, phi[k, p], half_gamma, pl_coef)
        else:
            de = _delta_flip(x, k, p, phi[k, p], ptr, members, I, J, q, coef)
        if not np.isfinite(de):
            state[4] = 1.0
            break
        if de >= 0.0 or uniforms[s] < math.exp(alpha * de):
            _apply_flip(phi, x, k, p)
            e += de
            accepted += 1.0
        since += 1.0
        if since >= audit_interval and alpha != 0.0:
            fresh = _energy(x, mode, I, J, q, coef, half_gamma, pl_coef)
            drift = abs(fresh - e)
            if drift > max_drift:
                max_drift = drift
            e = fresh
            since = 0.0
        if n_snap > 0 and (s + 1) % steps_per_snap == 0:
            r = (s + 1) // steps_per_snap - 1
            if r < n_snap:
                snaps[r] = phi
    state[0] = e
    state[1] = accepted
    state[2] = max_drift
    state[3] = since


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Kernel:
    mode: int
    ptr: np.ndarray
    members: np.ndarray
    I: np.ndarray
    J: np.ndarray
    q: np.ndarray
    coef: np.ndarray
    half_gamma: int
    pl_coef: np.ndarray

    @classmethod
    def for_spec(cls, spec: GibbsSpec) -> "_Kernel":
        empty_i = np.zeros(0, dtype=np.int64)
        pot = spec.potential
        if isinstance(pot, PowerLaw) and spec.interaction_set is None:
            t = np.arange(spec.T + 1, dtype=float)
            t[0] = 1.0
            pl = t ** (-pot.xi)
            pl[0] = 0.0
            return cls(MODE_POWER, np.zeros(spec.T + 1, dtype=np.int64), empty_i, empty_i,
                       empty_i, empty_i, np.zeros((0, 1)), pot.gamma // 2, pl)
        ce = compile_energy(spec)
        return cls(MODE_PAIRS, ce.ptr, ce.members, ce.I, ce.J, ce.q, ce.coef, 1, np.zeros(1))

    def args(self):
        return (self.mode, self.ptr, self.members, self.I, self.J, self.q, self.coef,
                self.half_gamma, self.pl_coef)


def check_budget(spec: GibbsSpec, cfg: SamplerConfig):
    if spec.n_spins > MAX_SPINS:
        raise CapacityError(f"MCMC needs d*T <= {MAX_SPINS}, got {spec.n_spins}")
    if isinstance(spec.potential, PowerLaw) and cfg.sweeps * spec.T**2 > MAX_WORK:
        raise CapacityError(
            f"power-law budget sweeps*T^2 = {cfg.sweeps * spec.T**2:.3g} exceeds {MAX_WORK:.0e}"
        )


def chain_generators(cfg: SamplerConfig) -> list[np.random.Generator]:
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    return [np.random.Generator(np.random.PCG64(s)) for s in seqs]


@dataclass
class ChainResult:
    sums: np.ndarray
    traces: list[np.ndarray]  # one full trace per observable
    histogram: np.ndarray | None
    accepted: float
    proposals: int
    max_drift: float


def _positions(phi: np.ndarray) -> np.ndarray:
    x = np.zeros((phi.shape[0] + 1, phi.shape[1]))
    np.cumsum(phi, axis=0, out=x[1:])
    return x


def _run_chain(spec, cfg, kernel, observables, rng, histogram) -> ChainResult:
    T, d, a = spec.T, spec.d, spec.step_amplitude
    n = spec.n_spins
    phi = a * (2.0 * rng.integers(0, 2, size=(T, d)) - 1.0)
    x = _positions(phi)
    e0 = _energy(x, *_energy_args(kernel))
    state = np.array([e0, 0.0, 0.0, 0.0, 0.0])
    kargs = kernel.args()
    n_obs = len(observables)
    traces = [[] for _ in range(n_obs)]
    hist = np.zeros(1 << n, dtype=np.int64) if histogram else None
    weights = (1 << np.arange(n, dtype=np.int64)).reshape(T, d)
    no_snaps = np.zeros((0, T, d))

    batch = max(cfg.thin, (BATCH_FLOATS // n) // cfg.thin * cfg.thin)

    def advance(n_sweeps, snaps, steps_per_snap):
        steps = n_sweeps * n
        sites = rng.integers(0, n, size=steps)
        uniforms = rng.random(steps)
        _run_batch(phi, x, state, sites, uniforms, spec.alpha, steps_per_snap, snaps, *kargs,
                   AUDIT_INTERVAL)
        if state[4] == 1.0:
            raise NumericError("non-finite energy change in Metropolis step")

    done = 0
    while done < cfg.burnin:
        m = min(batch, cfg.burnin - done)
        advance(m, no_snaps, 1)
        done += m
    remaining = cfg.samples_per_chain * cfg.thin
    while remaining > 0:
        m = min(batch, remaining)
        snaps = np.empty((m // cfg.thin, T, d))
        advance(m, snaps, cfg.thin * n)
        for o, obs in enumerate(observables):
            traces[o].append(obs.values(snaps))
        if hist is not None:
            codes = np.sum((snaps > 0) * weights, axis=(1, 2))
            hist += np.bincount(codes, minlength=hist.size)
        remaining -= m
    if state[2] > AUDIT_TOL:
        raise NumericError(f"incremental energy drifted by {state[2]:.3e} from a fresh evaluation")
    full = [np.concatenate(t) if t else np.zeros(0) for t in traces]
    sums = np.array([np.sum(t) for t in full])
    return ChainResult(
        sums=sums,
        traces=full,
        histogram=hist,
        accepted=state[1],
        proposals=cfg.sweeps * n,
        max_drift=float(state[2]),
    )


def _energy_args(kernel: _Kernel):
    return (kernel.mode, kernel.I, kernel.J, kernel.q, kernel.coef, kernel.half_gamma, kernel.pl_coef)


def integrated_autocorrelation(traces: Sequence[np.ndarray], c: float = 5.0) -> float:
    """Sokal's windowed estimate of the integrated autocorrelation time, in samples.

    The normalized autocovariance is averaged over chains; traces are cut to
    their last ``IAT_MAX_LEN`` samples.
    """
    traces = [np.asarray(t, dtype=float)[-IAT_MAX_LEN:] for t in traces if len(t) > 1]
    if not traces:
        return 1.0
    n = min(len(t) for t in traces)
    acf = np.zeros(n)
    used = 0
    size = 1 << int(math.ceil(math.log2(2 * n)))
    for t in traces:
        y = t[-n:] - t[-n:].mean()
        f = np.fft.rfft(y, size)
        ac = np.fft.irfft(f * np.conj(f), size)[:n]
        if ac[0] > 0:
            acf += ac / ac[0]
            used += 1
    if not used:
        return 1.0
    acf /= used
    tau = 1.0
    for m in range(1, n):
        tau += 2.0 * acf[m]
        if m >= c * tau:
            break
    return float(max(tau, 1.0))


@dataclass
class SamplerRun:
    estimates: list[Estimate]
    acceptance_rate: float
    histogram: np.ndarray | None
    max_drift: float
    traces: list[list[np.ndarray]]

    def probabilities(self) -> np.ndarray:
        if self.histogram is None:
            raise DomainError("run was made without a configuration histogram")
        return self.histogram / self.histogram.sum()


def run_chains(
    spec: GibbsSpec,
    observables: Sequence[Observable],
    cfg: SamplerConfig,
    workers: int = 1,
    histogram: bool = False,
    keep_traces: bool = False,
) -> SamplerRun:
    """Run ``cfg.chains`` independent chains and estimate every observable.

    Chain statistics are merged in chain order, so results do not depend on
    ``workers``.  ``std_error`` is the standard error of the chain means.
    """
    check_budget(spec, cfg)
    for obs in observables:
        obs.validate(spec.T, spec.d)
    if cfg.samples_per_chain < 1:
        raise DomainError("configuration yields no samples after burn-in and thinning")
    if histogram and spec.n_spins > HIST_MAX_SPINS:
        raise CapacityError(f"histograms need d*T <= {HIST_MAX_SPINS}")
    kernel = _Kernel.for_spec(spec)
    rngs = chain_generators(cfg)

    def one(c):
        return _run_chain(spec, cfg, kernel, observables, rngs[c], histogram)

    if workers > 1 and cfg.chains > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(cfg.chains)))
    else:
        results = [one(c) for c in range(cfg.chains)]

    per_chain = cfg.samples_per_chain
    estimates = []
    for o in range(len(observables)):
        means = np.array([r.sums[o] / per_chain for r in results])
        se = float(np.std(means, ddof=1) / math.sqrt(cfg.chains)) if cfg.chains > 1 else math.nan
        tau = integrated_autocorrelation([r.traces[o] for r in results]) * cfg.thin
        estimates.append(Estimate(float(means.mean()), se, per_chain * cfg.chains, tau, tuple(means)))
    hist = None
    if histogram:
        hist = np.sum([r.histogram for r in results], axis=0)
    accepted = sum(r.accepted for r in results)
    proposals = sum(r.proposals for r in results)
    return SamplerRun(
        estimates=estimates,
        acceptance_rate=accepted / proposals,
        histogram=hist,
        max_drift=max(r.max_drift for r in results),
        traces=[r.traces for r in results] if keep_traces else [],
    )


def sample_expectation(spec: GibbsSpec, obs: Observable, cfg: SamplerConfig, workers: int = 1) -> Estimate:
    """Metropolis estimate of ``E[obs]`` with a between-chain standard error."""
    return run_chains(spec, [obs], cfg, workers).estimates[0]


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


# ---------------------------------------------------------------------------
# Scaling sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingResult:
    points: tuple
    slope: float
    slope_std_error: float
    label: str = "DIAGNOSTIC"

    def slope_z(self, reference: float = 1.0) -> float:
        return (self.slope - reference) / self.slope_std_error


def fit_loglog_slope(Ts: Sequence[int], estimates: Sequence[Estimate]) -> tuple[float, float]:
    """Weighted least-squares slope of ``log2 mean`` against ``log2 T`` and its standard error."""
    X = np.log2(np.asarray(Ts, dtype=float))
    means = np.array([e.mean for e in estimates])
    if np.any(means <= 0):
        raise NumericError("non-positive mean in log-log fit")
    Y = np.log2(means)
    sig = np.array([e.std_error for e in estimates]) / (means * math.log(2.0))
    sig = np.where(sig > 0, sig, np.min(sig[sig > 0], initial=1e-12))
    w = 1.0 / sig**2
    A = np.vstack([np.ones_like(X), X]).T
    cov = np.linalg.inv(A.T @ (A * w[:, None]))
    beta = cov @ (A.T @ (w * Y))
    return float(beta[1]), float(math.sqrt(cov[1, 1]))


def msd_scaling_sweep(
    potential, alpha: float, horizons: Sequence[int], cfg: SamplerConfig, workers: int = 1, d: int = 1
) -> ScalingResult:
    """Per-horizon MSD estimates and the fitted growth exponent (diagnostic only)."""
    horizons = list(horizons)
    if len(horizons) < 2:
        raise DomainError("need at least two horizons to fit a slope")
    for T in horizons:
        if T < 2 or T & (T - 1):
            raise DomainError(f"horizons must be powers of two, got {T}")
    specs = [GibbsSpec(d, T, alpha, potential) for T in horizons]
    for s in specs:
        check_budget(s, cfg)
    points = [(s.T, sample_expectation(s, EndpointSquare(), cfg, workers)) for s in specs]
    slope, se = fit_loglog_slope([T for T, _ in points], [e for _, e in points])
    return ScalingResult(tuple(points), slope, se)
