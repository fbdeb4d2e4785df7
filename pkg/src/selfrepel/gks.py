"""Correlation-inequality checks on small instances, and exact spin-polynomial expansions.

Every numeric check returns a slack (left side minus right side) computed
with the exact enumeration oracle; a check passes when the slack is at least
``-SLACK_TOL``.  Spin polynomials are expanded in exact rational arithmetic,
reduced with ``phi**2 = a**2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import exact
from .errors import CapacityError, CertificationError, ContractError, DomainError
from .model import CoefficientTable, GibbsSpec, PowerLaw
from .observables import (
    EndpointCoordinate,
    EndpointSquare,
    Monomial,
    Observable,
    observable_from_dict,
    observable_to_dict,
)

SLACK_TOL = 1e-9
MAX_GKS_SPINS = 20
MAX_POLY_SPINS = 12
MAX_POLY_DEGREE = 8


# ---------------------------------------------------------------------------
# Exact spin polynomials
# ---------------------------------------------------------------------------


def _popcount(m: int) -> int:
    return bin(m).count("1")


@dataclass(frozen=True)
class SpinPolynomial:
    """Multilinear polynomial in ``n`` spins ``phi_k in {-a, +a}``.

    ``terms`` maps a bitmask (bit ``k-1`` for spin ``k``) to an exact
    rational coefficient.  Products are reduced with ``phi_k**2 = a**2``, so
    no spin appears twice in a monomial.
    """

    n: int
    terms: Mapping[int, Fraction] = field(default_factory=dict)
    amplitude: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("number of spins must be >= 0")
        amp = Fraction(self.amplitude)
        if amp <= 0:
            raise DomainError("amplitude must be > 0")
        full = (1 << self.n) - 1
        clean = {}
        for m, c in dict(self.terms).items():
            if m & ~full:
                raise DomainError(f"monomial mask {m:#x} uses spins beyond n = {self.n}")
            c = Fraction(c)
            if c:
                clean[int(m)] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))
        object.__setattr__(self, "amplitude", amp)

    @classmethod
    def constant(cls, n: int, value=1, amplitude=1) -> "SpinPolynomial":
        return cls(n, {0: Fraction(value)}, amplitude)

    @classmethod
    def spin(cls, n: int, k: int, amplitude=1) -> "SpinPolynomial":
        """The single spin ``phi_k`` (1-based)."""
        if not 1 <= k <= n:
            raise DomainError(f"spin index {k} outside 1..{n}")
        return cls(n, {1 << (k - 1): Fraction(1)}, amplitude)

    @classmethod
    def spin_sum(cls, n: int, indices: Iterable[int] | None = None, amplitude=1) -> "SpinPolynomial":
        idx = range(1, n + 1) if indices is None else indices
        return cls(n, {1 << (k - 1): Fraction(1) for k in idx}, amplitude)

    def _compatible(self, other: "SpinPolynomial"):
        if self.n != other.n or self.amplitude != other.amplitude:
            raise DomainError("spin polynomials live on different spin spaces")

    def __add__(self, other):
        if not isinstance(other, SpinPolynomial):
            return self + SpinPolynomial.constant(self.n, other, self.amplitude)
        self._compatible(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return SpinPolynomial(self.n, out, self.amplitude)

    def __neg__(self):
        return SpinPolynomial(self.n, {m: -c for m, c in self.terms.items()}, self.amplitude)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "SpinPolynomial":
        f = Fraction(factor)
        return SpinPolynomial(self.n, {m: f * c for m, c in self.terms.items()}, self.amplitude)

    def __mul__(self, other):
        if not isinstance(other, SpinPolynomial):
            return self.scale(other)
        self._compatible(other)
        a2 = self.amplitude**2
        out: dict[int, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c = c1 * c2
                overlap = _popcount(m1 & m2)
                if overlap and a2 != 1:
                    c *= a2**overlap
                key = m1 ^ m2
                out[key] = out.get(key, 0) + c
        return SpinPolynomial(self.n, out, self.amplitude)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "SpinPolynomial":
        if k < 0:
            raise DomainError("negative powers are not polynomials")
        out = SpinPolynomial.constant(self.n, 1, self.amplitude)
        for _ in range(k):
            out = out * self
        return out

    def coefficient(self, subset: Iterable[int]) -> Fraction:
        m = sum(1 << (k - 1) for k in set(subset))
        return self.terms.get(m, Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def min_coefficient(self, include_constant: bool = True) -> Fraction:
        vals = [c for m, c in self.terms.items() if include_constant or m]
        return min(vals, default=Fraction(0))

    def is_nonnegative(self, include_constant: bool = True) -> bool:
        return self.min_coefficient(include_constant) >= 0

    def evaluate(self, signs: Sequence[int]) -> Fraction:
        """Exact value at spins ``phi_k = signs[k-1] * a``."""
        if len(signs) != self.n:
            raise DomainError(f"expected {self.n} signs, got {len(signs)}")
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for k in range(self.n):
                if (m >> k) & 1:
                    v *= signs[k] * self.amplitude
            total += v
        return total

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "amplitude": str(self.amplitude),
            "terms": [
                [[k + 1 for k in range(self.n) if (m >> k) & 1], str(c)] for m, c in self.terms.items()
            ],
        }


def expand_phi_power_minus_square(N: int, gamma: int) -> SpinPolynomial:
    """``Phi**gamma - Phi**2`` with ``Phi = N**-0.5 * sum_j phi_j`` and unit spins."""
    if not 1 <= N <= MAX_POLY_SPINS:
        raise CapacityError(f"N must lie in 1..{MAX_POLY_SPINS}, got {N}")
    if int(gamma) != gamma or gamma < 2 or gamma % 2:
        raise DomainError(f"gamma must be an even integer >= 2, got {gamma}")
    if gamma > MAX_POLY_DEGREE:
        raise CapacityError(f"gamma must be <= {MAX_POLY_DEGREE}, got {gamma}")
    S = SpinPolynomial.spin_sum(N)
    S2 = S * S
    high = S2 ** (gamma // 2)
    return high.scale(Fraction(1, N ** (gamma // 2))) - S2.scale(Fraction(1, N))


def lag_polynomial(potential: CoefficientTable, t: int, d: int = 1, step_amplitude=1.0) -> SpinPolynomial:
    """``W(x_{s+t} - x_s, t)`` as a spin polynomial in the ``t * d`` increments it touches.

    Spin ``(k - 1) * d + p`` is coordinate ``p`` of the ``k``-th increment.
    """
    n = t * d
    if n > MAX_POLY_SPINS:
        raise CapacityError(f"lag {t} in dimension {d} needs {n} spins, cap is {MAX_POLY_SPINS}")
    q, poly = potential.polynomial(t)
    degree = q * (len(poly) - 1)
    if degree > MAX_POLY_DEGREE:
        raise CapacityError(f"spatial degree {degree} exceeds {MAX_POLY_DEGREE}")
    amp = Fraction(step_amplitude)
    inner = SpinPolynomial(n, {}, amp)
    for p in range(1, d + 1):
        z = SpinPolynomial.spin_sum(n, ((k - 1) * d + p for k in range(1, t + 1)), amp)
        inner = inner + z**q
    out = SpinPolynomial(n, {}, amp)
    power = SpinPolynomial.constant(n, 1, amp)
    for i, c in enumerate(poly):
        if i:
            power = power * inner
        if c:
            out = out + power.scale(Fraction(float(c)))
    return out


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    min_coefficient: Fraction
    worst_lag: int | None


def signed_potential_admissible(potential: CoefficientTable, d: int = 1, step_amplitude=1.0):
    """Check that every lag of a (possibly signed) table expands into non-negative p-spin terms.

    The constant term is ignored: it does not change the measure.
    """
    if not isinstance(potential, CoefficientTable):
        raise DomainError("admissibility is checked for coefficient tables")
    worst = (Fraction(0), None)
    for t in sorted({t for (_, t), c in potential.coeffs if c != 0}):
        m = lag_polynomial(potential, t, d, step_amplitude).min_coefficient(include_constant=False)
        if m < worst[0]:
            worst = (m, t)
    return AdmissibilityReport(worst[0] >= 0, worst[0], worst[1])


def _require_gks_potential(spec: GibbsSpec):
    pot = spec.potential
    if isinstance(pot, CoefficientTable) and pot.signed:
        report = signed_potential_admissible(pot, spec.d, spec.step_amplitude)
        if not report.admissible:
            raise DomainError(
                f"signed potential has a negative spin coefficient {report.min_coefficient} "
                f"at lag {report.worst_lag}"
            )


def _check_capacity(spec: GibbsSpec):
    if spec.n_spins > MAX_GKS_SPINS:
        raise CapacityError(f"GKS checks need d*T <= {MAX_GKS_SPINS}, got {spec.n_spins}")


# ---------------------------------------------------------------------------
# Numeric checks
# ---------------------------------------------------------------------------


def check_gks_pair(spec: GibbsSpec, f: Monomial, g: Monomial, workers: int = 1) -> float:
    """``E[fg] - E[f] E[g]`` under the Gibbs measure of ``spec``."""
    _check_capacity(spec)
    _require_gks_potential(spec)
    ef, eg, efg = exact.expectations(spec, [f, g, f * g], workers)
    return efg.value - ef.value * eg.value


def _pair_weights(spec: GibbsSpec) -> dict[tuple[int, int], float]:
    return {(i, j): w for i, j, w in spec.pairs()}


def check_omission_monotonicity(
    spec_M: GibbsSpec, spec_Msub: GibbsSpec, f: Observable, workers: int = 1
) -> float:
    """``E_M[f] - E_{M'}[f]`` for an interaction set ``M'`` contained in ``M``.

    Containment is weighted: every pair of ``M'`` must appear in ``M`` with
    at least the same weight.
    """
    same_base = (
        spec_M.d == spec_Msub.d
        and spec_M.T == spec_Msub.T
        and spec_M.alpha == spec_Msub.alpha
        and spec_M.step_amplitude == spec_Msub.step_amplitude
        and spec_M.potential == spec_Msub.potential
    )
    if not same_base:
        raise ContractError("both measures must share base walk, coupling and potential")
    big = _pair_weights(spec_M)
    for key, w in _pair_weights(spec_Msub).items():
        if big.get(key, 0.0) < w:
            raise ContractError(f"pair {key} of the sub-measure is not contained in M")
    _check_capacity(spec_M)
    _require_gks_potential(spec_M)
    return (
        exact.expectation(spec_M, f, workers).value - exact.expectation(spec_Msub, f, workers).value
    )


@dataclass(frozen=True)
class BallisticResult:
    mean_endpoint: float
    per_step: float
    bound: float

    @property
    def slack(self) -> float:
        return self.per_step - self.bound

    @property
    def passed(self) -> bool:
        return self.slack >= -SLACK_TOL

    def __iter__(self):
        return iter((self.mean_endpoint, self.per_step))


def ballistic_field(potential: CoefficientTable, step_amplitude: float = 1.0) -> float:
    """Single-spin field produced by the odd part of the lag-2 term.

    For ``u, v in {-a, a}`` and odd ``m``, ``(u + v)**m = (2a)**(m-1) (u + v)``,
    so each lag-2 pair contributes ``K (phi_k + phi_{k+1})`` with
    ``K = sum_{odd i*q} c[i, 2] (2a)**(i*q - 1)``.
    """
    q = potential.q
    return sum(
        c * (2.0 * step_amplitude) ** (i * q - 1)
        for (i, t), c in potential.coeffs
        if t == 2 and (i * q) % 2
    )


def check_ballistic(spec: GibbsSpec, workers: int = 1) -> BallisticResult:
    """Exact ``E[x_T^1]`` and ``E[x_T^1] / T`` against ``a tanh(alpha K a)``.

    All other interactions are non-negative spin polynomials, so dropping
    them lowers the mean; what is left is an independent field of strength
    at least ``alpha K a`` on every spin.
    """
    pot = spec.potential
    if not isinstance(pot, CoefficientTable) or pot.q % 2 == 0:
        raise DomainError("ballistic check needs a coefficient table with odd q")
    if not any(c > 0 and i % 2 for (i, t), c in pot.coeffs if t == 2):
        raise DomainError("ballistic check needs c[i, 2] > 0 for some odd i")
    _check_capacity(spec)
    _require_gks_potential(spec)
    mean = exact.expectation(spec, EndpointCoordinate(1), workers).value
    a = spec.step_amplitude
    K = ballistic_field(pot, a)
    return BallisticResult(mean, mean / spec.T, a * math.tanh(spec.alpha * K * a))


def check_dim_reduction(spec_d: GibbsSpec, workers: int = 1) -> float:
    """``E_d[||x_T||**2] - d * E_1[x_T**2]`` with the same potential in one dimension.

    In one dimension the potential keeps exactly the single-coordinate terms
    ``sum_i c[i, t] z**(q i)``; the cross-coordinate remainder is what gets dropped.
    """
    if spec_d.d < 2:
        raise DomainError("dimension reduction needs d >= 2")
    _check_capacity(spec_d)
    _require_gks_potential(spec_d)
    one = spec_d.replace(d=1)
    lhs = exact.expectation(spec_d, EndpointSquare(), workers).value
    rhs = exact.expectation(one, EndpointSquare(), workers).value
    return lhs - spec_d.d * rhs


def check_gamma_reduction(T: int, alpha: float, gamma: int, c: float, workers: int = 1) -> float:
    """``E_{gamma, gamma/2 + c}[x_T**2] - E_{2, 1 + c}[x_T**2]`` for unit steps.

    Each pair term differs by ``(Phi**gamma - Phi**2) / n**c`` with ``Phi``
    the normalized block sum, a non-negative spin polynomial.
    """
    if not c > 0:
        raise DomainError(f"c must be > 0, got {c}")
    hi = GibbsSpec(1, T, alpha, PowerLaw(gamma, gamma / 2 + c))
    lo = GibbsSpec(1, T, alpha, PowerLaw(2, 1.0 + c))
    _check_capacity(hi)
    return (
        exact.expectation(hi, EndpointSquare(), workers).value
        - exact.expectation(lo, EndpointSquare(), workers).value
    )


# ---------------------------------------------------------------------------
# Randomized suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    check: str
    spec_hash: str
    slack: float
    passed: bool
    replay: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> str:
        return json.dumps(
            {"check": self.check, "spec_hash": self.spec_hash, "slack": self.slack, "pass": self.passed},
            sort_keys=True,
        )


@dataclass
class SuiteReport:
    name: str
    records: list[CheckRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def min_slack(self) -> float:
        return min((r.slack for r in self.records), default=math.inf)

    def jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)


def _record(check: str, spec: GibbsSpec, slack: float, replay: dict, abort: bool) -> CheckRecord:
    rec = CheckRecord(check, spec.spec_hash(), float(slack), bool(slack >= -SLACK_TOL), replay)
    if abort and not rec.passed:
        raise CertificationError(
            f"{check} failed with slack {slack:.3e} on spec {rec.spec_hash}", replay=replay
        )
    return rec


def random_table(rng: np.random.Generator, T: int, max_i: int = 2) -> CoefficientTable:
    """Random non-negative table: ``q in {1, 2}``, ``c[i, t]`` uniform on ``[0, 1]``.

    Lag 2 is always present so the short-range part is non-trivial.
    """
    q = int(rng.integers(1, 3))
    lags = {2} | {int(t) for t in rng.integers(1, T + 1, size=int(rng.integers(0, 4)))}
    coeffs = {}
    for t in sorted(lags):
        for i in range(1, int(rng.integers(1, max_i + 1)) + 1):
            coeffs[(i, t)] = float(rng.uniform(0.0, 1.0))
    return CoefficientTable(q, coeffs)


def random_monomial(rng: np.random.Generator, T: int, d: int, max_degree: int = 3) -> Monomial:
    deg = int(rng.integers(1, max_degree + 1))
    steps = rng.integers(1, T + 1, size=deg)
    coords = rng.integers(1, d + 1, size=deg)
    return Monomial(tuple((int(s), int(p), 1) for s, p in zip(steps, coords)))


def _random_spec(rng: np.random.Generator, T_max: int, d_max: int = 2) -> GibbsSpec:
    d = int(rng.integers(1, d_max + 1))
    T = int(rng.integers(2, T_max // d + 1))
    alpha = float(rng.uniform(0.0, 1.0))
    return GibbsSpec(d, T, alpha, random_table(rng, T))


def gks_pair_suite(
    n_checks: int = 500,
    T_max: int = 10,
    pairs_per_spec: int = 10,
    seed: int = 0,
    workers: int = 1,
    abort: bool = True,
) -> SuiteReport:
    """Random specs with ``d * T <= T_max`` and random monomial pairs of degree <= 3."""
    rng = np.random.default_rng(seed)
    records: list[CheckRecord] = []
    while len(records) < n_checks:
        spec = _random_spec(rng, T_max)
        for _ in range(min(pairs_per_spec, n_checks - len(records))):
            f = random_monomial(rng, spec.T, spec.d)
            g = random_monomial(rng, spec.T, spec.d)
            slack = check_gks_pair(spec, f, g, workers)
            replay = {"spec": spec.to_dict(), "f": list(map(list, f.factors)), "g": list(map(list, g.factors))}
            records.append(_record("gks_pair", spec, slack, replay, abort))
    return SuiteReport("gks_pair", records)


def omission_suite(
    n_checks: int = 200, T_max: int = 8, seed: int = 1, workers: int = 1, abort: bool = True
) -> SuiteReport:
    """Random nested interaction sets ``M' ⊆ M`` and monomial or ``||x_T||**2`` observables."""
    rng = np.random.default_rng(seed)
    records: list[CheckRecord] = []
    while len(records) < n_checks:
        base = _random_spec(rng, T_max)
        all_pairs = base.pairs()
        keep = rng.random(len(all_pairs)) < rng.uniform(0.2, 1.0)
        M = [(i, j, w) for (i, j, w), k in zip(all_pairs, keep) if k]
        sub = [(i, j, w) for (i, j, w) in M if rng.random() < 0.5]
        spec_M = base.replace(interaction_set=tuple(M))
        spec_sub = base.replace(interaction_set=tuple(sub))
        f = EndpointSquare() if rng.random() < 0.2 else random_monomial(rng, base.T, base.d)
        slack = check_omission_monotonicity(spec_M, spec_sub, f, workers)
        replay = {"spec_M": spec_M.to_dict(), "spec_sub": spec_sub.to_dict(), "f": observable_to_dict(f)}
        records.append(_record("omission", spec_M, slack, replay, abort))
    return SuiteReport("omission", records)


def phi_power_suite(Ns: Iterable[int] = range(2, 9), gammas: Iterable[int] = (4, 6)) -> SuiteReport:
    """Coefficient positivity of ``Phi**gamma - Phi**2`` on a grid of sizes."""
    records = []
    for N, gamma in product(list(Ns), list(gammas)):
        poly = expand_phi_power_minus_square(N, gamma)
        m = poly.min_coefficient()
        records.append(
            CheckRecord(
                "phi_power_expansion",
                f"N={N},gamma={gamma}",
                float(m),
                bool(m >= 0),
                {"N": N, "gamma": gamma},
            )
        )
    return SuiteReport("phi_power_expansion", records)


def replay_record(replay: Mapping, workers: int = 1) -> float:
    """Recompute the slack of a serialized gks-pair or omission check."""
    if "f" in replay and "g" in replay:
        spec = GibbsSpec.from_dict(replay["spec"])
        f = Monomial(tuple(tuple(x) for x in replay["f"]))
        g = Monomial(tuple(tuple(x) for x in replay["g"]))
        return check_gks_pair(spec, f, g, workers)
    if "spec_M" in replay and "spec_sub" in replay:
        return check_omission_monotonicity(
            GibbsSpec.from_dict(replay["spec_M"]),
            GibbsSpec.from_dict(replay["spec_sub"]),
            observable_from_dict(replay["f"]),
            workers,
        )
    raise DomainError("replay record is neither a gks-pair nor an omission check")

