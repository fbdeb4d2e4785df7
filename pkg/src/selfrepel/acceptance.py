"""Registry of the end-to-end acceptance checks.

Each check returns a :class:`CriterionResult`; a check passes only if its
numerical condition holds and it finished inside its time budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import exact, gks, mcmc, multiscale, tilt
from . import transfer_matrix as tm
from .errors import DomainError
from .model import CoefficientTable, GibbsSpec, PowerLaw, nearest_neighbor_quadratic
from .observables import EndpointSquare, Monomial, PairEqualIndicator

TOL_SLACK = 1e-9


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    detail: str

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.title} ({self.seconds:.2f}s / {self.budget:g}s) {self.detail}"


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    budget: float
    tags: frozenset
    check: Callable[[int], tuple[bool, str]]

    def run(self, workers: int = 1) -> CriterionResult:
        t0 = time.perf_counter()
        ok, detail = self.check(workers)
        dt = time.perf_counter() - t0
        if dt > self.budget:
            detail += "; over time budget"
        return CriterionResult(self.number, self.title, bool(ok) and dt <= self.budget, dt, self.budget, detail)


def _oracle_closed_forms(workers: int):
    worst = 0.0
    for alpha in (0.25, 0.5, 1.0):
        spec = GibbsSpec(1, 2, alpha, nearest_neighbor_quadratic())
        ex2, mono, eq = exact.expectations(
            spec, [EndpointSquare(), Monomial.of(1, 2), PairEqualIndicator(1, 2)], workers
        )
        worst = max(
            worst,
            abs(ex2.value - 4.0 / (1.0 + math.exp(-4.0 * alpha))),
            abs(mono.value - math.tanh(2.0 * alpha)),
            abs(eq.value - 1.0 / (1.0 + math.exp(-4.0 * alpha))),
        )
    return worst <= 1e-10, f"max abs error {worst:.2e}"


def _ising_chain(workers: int):
    worst = 0.0
    for alpha in np.round(np.arange(1, 11) * 0.1, 10):
        params = tm.IsingParams.from_alpha(alpha)
        for T in range(2, 13):
            ref = exact.expectation(GibbsSpec(1, T, alpha, nearest_neighbor_quadratic()), EndpointSquare(), workers)
            worst = max(worst, abs(tm.finite_chain_msd(params, T) / ref.value - 1.0))
    chi = max(
        abs(tm.susceptibility(tm.IsingParams(b)) / math.exp(2.0 * b) - 1.0) for b in np.linspace(0.0, 20.0, 401)
    )
    return worst <= 1e-8 and chi <= 1e-12, f"msd rel err {worst:.2e}, chi rel err {chi:.2e}"


def _short_range_growth(workers: int):
    T = 10**5
    worst = math.inf
    for alpha in np.linspace(1.0, 3.0, 9):
        per_step = tm.banded_msd_per_step(nearest_neighbor_quadratic(), alpha, T)
        worst = min(worst, math.log(per_step) - (4.0 * alpha - 2.0))
    return worst >= 0.0, f"min log-msd margin {worst:.3f}"


def _gks_suites(workers: int):
    pairs = gks.gks_pair_suite(500, T_max=10, seed=0, workers=workers, abort=False)
    omit = gks.omission_suite(200, T_max=8, seed=1, workers=workers, abort=False)
    ok = pairs.passed and omit.passed and len(pairs.records) == 500 and len(omit.records) == 200
    return ok, f"min slack pairs {pairs.min_slack:.2e}, omission {omit.min_slack:.2e}"


def _ballistic(workers: int):
    spec = GibbsSpec(1, 8, 1.0, CoefficientTable(1, {(1, 2): 1.0}))
    res = gks.check_ballistic(spec, workers)
    margin = res.per_step - math.tanh(1.0)
    return margin >= -TOL_SLACK, f"E[x_T]/T = {res.per_step:.6f}, margin {margin:.3e}"


def _tanh_bound(workers: int):
    summary = tilt.tanh_bound_trials(1000, max_pairs=6, rng=np.random.default_rng(2024))
    return summary.passed, f"min slack {summary.min_slack:.2e} over {summary.trials} laws"


def _four_point(workers: int):
    worst_val = 0.0
    worst_arg = 0.0
    ok = True
    for V in (0.5, 1.0, 1.5):
        for beta in (0.5, 1.0, 2.0 / V):
            h = 1e-3 * V
            res = tilt.minimize_four_point(V, beta, h)
            dv = abs(res.value - V * math.tanh(beta * V))
            da = max(abs(res.measure.a - V), abs(res.measure.b - V)) / h
            worst_val, worst_arg = max(worst_val, dv), max(worst_arg, da)
            ok &= dv <= 1e-4 and da <= 2.0
    return ok, f"max |min - V tanh| {worst_val:.2e}, max argmin offset {worst_arg:.2f} h"


def _block_covariance(workers: int):
    worst = math.inf
    for T in (8, 16):
        for alpha in (0.5, 1.0):
            rep = tilt.block_covariance_check(T, alpha, 0.5, workers=workers)
            worst = min(worst, rep.slack)
    return worst >= -TOL_SLACK, f"min slack {worst:.3e}"


def _recursion(workers: int):
    cc = multiscale.c_crit()
    ok = abs(cc - 0.973818) <= 1e-5 and abs(multiscale.alpha_star(0.5) - 0.623225) <= 1e-5
    ok &= multiscale.theorem2_exponent() == 1.0 + cc
    wrong = 0
    worst_ratio = 0.0
    for alpha in np.linspace(0.1, 5.0, 20):
        for c in np.linspace(0.04, 0.94, 20):
            pt = multiscale.classify_phase(alpha, c)
            expected = "divergent" if alpha > multiscale.alpha_star(c) else "bounded"
            if pt.classification != expected or pt.iteration_agrees is not True:
                wrong += 1
            if expected == "divergent":
                st = multiscale.iterate_recursion(alpha, c, 101)
                r = (st[-1].log_V - st[-2].log_V) / math.log(2.0)
                worst_ratio = max(worst_ratio, abs(r - cc))
    ok &= wrong == 0 and worst_ratio <= 1e-6
    return ok, f"c_crit {cc:.9f}, misclassified {wrong}/400, ratio error at n=100 {worst_ratio:.1e}"


def _mcmc(workers: int):
    cfg = mcmc.SamplerConfig(sweeps=625_000, burnin=1_000, thin=1, chains=16, seed=7)
    obs = [EndpointSquare(), Monomial.of(1, 2)]
    parts = []
    ok = True
    for spec in (
        GibbsSpec(1, 8, 0.25, nearest_neighbor_quadratic()),
        GibbsSpec(1, 8, 0.1, PowerLaw(2, 1.5)),
    ):
        run = mcmc.run_chains(spec, obs, cfg, workers, histogram=True)
        ref = exact.expectations(spec, obs)
        z = max(abs(e.mean - r.value) / e.std_error for e, r in zip(run.estimates, ref))
        tv = mcmc.total_variation(run.probabilities(), exact.probabilities(spec))
        ok &= z <= 3.0 and tv <= 0.01
        parts.append(f"z {z:.2f} tv {tv:.4f}")
    free = mcmc.sample_expectation(
        GibbsSpec(1, 256, 0.0, nearest_neighbor_quadratic()),
        EndpointSquare(),
        mcmc.SamplerConfig(sweeps=20_000, burnin=1_000, thin=10, chains=16, seed=8),
        workers,
    )
    z0 = abs(free.mean - 256.0) / free.std_error
    ok &= z0 <= 3.0
    parts.append(f"free walk z {z0:.2f}")
    return ok, ", ".join(parts)


def _phi_power(workers: int):
    rep = gks.phi_power_suite(range(2, 9), (4, 6))
    return rep.passed, f"min coefficient {rep.min_slack:.4f} over {len(rep.records)} expansions"


CRITERIA = [
    Criterion(1, "oracle closed forms", 1.0, frozenset({"short-range", "numbers"}), _oracle_closed_forms),
    Criterion(2, "Ising chain agreement", 10.0, frozenset({"short-range", "numbers"}), _ising_chain),
    Criterion(3, "short-range growth law", 10.0, frozenset({"short-range"}), _short_range_growth),
    Criterion(4, "GKS randomized suites", 300.0, frozenset({"gks"}), _gks_suites),
    Criterion(5, "odd-interaction ballisticity", 1.0, frozenset({"short-range", "gks"}), _ballistic),
    Criterion(6, "tanh lower bound trials", 60.0, frozenset({"long-range", "tilt"}), _tanh_bound),
    Criterion(7, "four-point extremality", 120.0, frozenset({"long-range", "tilt"}), _four_point),
    Criterion(8, "split-measure block covariance", 120.0, frozenset({"long-range", "tilt"}), _block_covariance),
    Criterion(9, "recursion constants and phases", 10.0, frozenset({"long-range", "recursion", "numbers"}), _recursion),
    Criterion(10, "Metropolis validation", 900.0, frozenset({"mcmc"}), _mcmc),
    Criterion(11, "spin expansion positivity", 60.0, frozenset({"long-range", "gks"}), _phi_power),
]

SELECTORS = ("all", "short-range", "long-range", "gks", "tilt", "recursion", "mcmc", "numbers")


def select(selector: str) -> list[Criterion]:
    """Criteria matching a selector name or a criterion number."""
    if selector == "all":
        return list(CRITERIA)
    if selector.isdigit() and 1 <= int(selector) <= len(CRITERIA):
        return [CRITERIA[int(selector) - 1]]
    if selector not in SELECTORS:
        raise DomainError(f"unknown acceptance selector {selector!r}; choose from {', '.join(SELECTORS)} or 1..{len(CRITERIA)}")
    return [c for c in CRITERIA if selector in c.tags]


def warmup() -> None:
    """Compile the numba kernels on tiny inputs so that budgets time the computation only."""
    spec = GibbsSpec(1, 2, 0.5, nearest_neighbor_quadratic())
    exact.expectation(spec, EndpointSquare())
    exact.expectation(GibbsSpec(1, 2, 0.5, PowerLaw(2, 1.5)), EndpointSquare())
    tm.banded_msd(nearest_neighbor_quadratic(), 0.5, 4)
    cfg = mcmc.SamplerConfig(sweeps=2, chains=2, seed=0)
    mcmc.sample_expectation(spec, EndpointSquare(), cfg)
    mcmc.sample_expectation(GibbsSpec(1, 2, 0.5, PowerLaw(2, 1.5)), EndpointSquare(), cfg)


def run(selectors: Iterable[str] = ("all",), workers: int = 1, echo: Callable[[str], None] | None = None):
    chosen: dict[int, Criterion] = {}
    for s in selectors:
        for c in select(s):
            chosen[c.number] = c
    warmup()
    results = []
    for n in sorted(chosen):
        res = chosen[n].run(workers)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
