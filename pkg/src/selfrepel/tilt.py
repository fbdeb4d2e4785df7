"""Two-block tilts, the ``V tanh(beta V)`` bound and the four-point extremal problem."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import exact
from .errors import DomainError
from .model import GibbsSpec, PowerLaw
from .observables import BlockProduct

SLACK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SymmetricMeasure:
    """Finite atomic probability measure on the line, invariant under ``x -> -x``."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if x.shape != w.shape or x.ndim != 1 or x.size == 0:
            raise DomainError("locations and weights must be matching non-empty 1-d arrays")
        if np.any(w < 0) or not np.all(np.isfinite(x)):
            raise DomainError("weights must be >= 0 and locations finite")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {w.sum()!r}, not 1")
        order = np.argsort(x, kind="stable")
        x, w = x[order], w[order]
        if not (np.array_equal(x, -x[::-1]) and np.array_equal(w, w[::-1])):
            raise DomainError("measure is not symmetric under x -> -x")
        object.__setattr__(self, "locations", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_pairs(cls, positions: Sequence[float], masses: Sequence[float], zero_mass: float = 0.0):
        """``zero_mass * delta_0 + sum_i masses[i]/2 * (delta_{x_i} + delta_{-x_i})``."""
        pos = np.abs(np.asarray(positions, dtype=float))
        m = np.asarray(masses, dtype=float)
        locs = np.concatenate([-pos[::-1], [0.0] if zero_mass else [], pos])
        wts = np.concatenate([m[::-1] / 2, [zero_mass] if zero_mass else [], m / 2])
        return cls(locs, wts)

    @classmethod
    def two_point(cls, x: float) -> "SymmetricMeasure":
        return cls.from_pairs([x], [1.0])

    def second_moment(self) -> float:
        return float(np.sum(self.weights * self.locations**2))


@dataclass(frozen=True)
class TiltedMoment:
    value: float
    degenerate: bool = False


def tilted_cross_moment(theta: SymmetricMeasure, beta: float) -> TiltedMoment:
    """``E[yz]`` under ``exp(beta y z) theta(dy) theta(dz)``, by a double sum over atoms."""
    if not beta >= 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    x, w = theta.locations, theta.weights
    keep = w > 0
    x, w = x[keep], w[keep]
    if np.all(x == 0):
        return TiltedMoment(0.0, degenerate=True)
    yz = np.outer(x, x)
    logits = beta * yz + np.log(w)[:, None] + np.log(w)[None, :]
    p = np.exp(logits - logits.max())
    return TiltedMoment(float(np.sum(p * yz) / np.sum(p)))


@dataclass(frozen=True)
class TanhBound:
    value: float
    certified: bool


def tanh_lower_bound(V: float, beta: float) -> TanhBound:
    """``V tanh(beta V)``; certified only while ``beta V <= 2``."""
    if not V > 0:
        raise DomainError(f"V must be > 0, got {V}")
    if not beta >= 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    return TanhBound(V * math.tanh(beta * V), beta * V <= 2.0)


# ---------------------------------------------------------------------------
# Four-point reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourPointMeasure:
    """``p/2 (delta_a + delta_{-a}) + (1-p)/2 (delta_b + delta_{-b})`` with ``0 < a <= b``."""

    a: float
    b: float
    p: float

    def __post_init__(self):
        if not (self.a > 0 and self.b >= self.a and 0.0 <= self.p <= 1.0):
            raise DomainError(f"need 0 < a <= b and p in [0, 1], got {self}")

    def variance(self) -> float:
        return self.p * self.a**2 + (1 - self.p) * self.b**2

    def as_symmetric(self) -> SymmetricMeasure:
        return SymmetricMeasure.from_pairs([self.a, self.b], [self.p, 1 - self.p])


def _ratio(a, b, p, beta):
    num = p * a * np.sinh(beta * a) + (1 - p) * b * np.sinh(beta * b)
    den = p * np.cosh(beta * a) + (1 - p) * np.cosh(beta * b)
    return num / den


def four_point_ratio(m: FourPointMeasure, beta: float) -> float:
    """``E[S e^{beta S}] / E[e^{beta S}]`` for ``S`` with the four-point law ``m``."""
    return float(_ratio(m.a, m.b, m.p, beta))


@dataclass(frozen=True)
class FourPointMinimum:
    measure: FourPointMeasure
    value: float
    bound: float

    @property
    def slack(self) -> float:
        return self.value - self.bound


def minimize_four_point(V: float, beta: float, h: float | None = None) -> FourPointMinimum:
    """Grid minimum of the tilted mean over four-point laws with variance ``V**2``.

    ``a`` runs over ``h, 2h, ..., V`` and ``p`` over the open unit interval in
    steps of ``h / V``; ``b`` follows from ``p a**2 + (1-p) b**2 = V**2``.
    The endpoints ``p in {0, 1}`` are left out: there one atom pair carries no
    mass and ``a`` (or ``b``) is arbitrary.  Ties within ``1e-13`` relative
    go to the lexicographically smallest ``(a, p)``.
    """
    if not V > 0:
        raise DomainError(f"V must be > 0, got {V}")
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if beta * V > 2.0 + 1e-12:
        raise DomainError(f"need beta * V <= 2, got {beta * V}")
    h = 1e-3 * V if h is None else h
    if not 0 < h <= 1e-3 * V * (1 + 1e-12):
        raise DomainError(f"grid resolution must satisfy 0 < h <= 1e-3 V, got {h}")
    n_a = int(round(V / h))
    a = np.linspace(V / n_a, V, n_a)
    n_p = n_a
    p = np.arange(1, n_p) / n_p
    A, P = np.meshgrid(a, p, indexing="ij")
    B2 = (V * V - P * A * A) / (1.0 - P)
    feasible = B2 >= A * A * (1 - 1e-15)
    if not np.any(feasible):
        raise DomainError("empty feasible set")
    B = np.sqrt(np.maximum(B2, A * A))
    with np.errstate(over="ignore", invalid="ignore"):
        F = np.where(feasible, _ratio(A, B, P, beta), np.inf)
    best = np.min(F)
    ties = np.argwhere(F <= best + 1e-13 * abs(best))
    ia, ip = min(map(tuple, ties))
    m = FourPointMeasure(float(A[ia, ip]), float(max(B[ia, ip], A[ia, ip])), float(P[ia, ip]))
    return FourPointMinimum(m, float(F[ia, ip]), V * math.tanh(beta * V))


def k_function(x, V: float, beta: float):
    """``k(x) = x sinh(beta x) - V tanh(beta V) cosh(beta x)``."""
    return x * np.sinh(beta * x) - V * np.tanh(beta * V) * np.cosh(beta * x)


def k_second_derivative(x, V: float, beta: float):
    c = beta * V * np.tanh(beta * V)
    return beta * np.cosh(beta * x) * (2.0 - c) + beta**2 * x * np.sinh(beta * x)


@dataclass(frozen=True)
class ConvexityReport:
    passed: bool
    min_second_difference: float
    k_at_V: float
    min_k_second_derivative: float


def convexity_certificate(V: float, beta: float, t_grid: Sequence[float]) -> ConvexityReport:
    """Check that ``phi(t) = k(sqrt t)`` is convex on ``t_grid`` and ``k(V) = 0``.

    Second divided differences of ``phi`` on the (possibly non-uniform) grid
    must be positive, as must ``k''`` at ``sqrt(t)``.
    """
    t = np.sort(np.asarray(t_grid, dtype=float))
    if t.size < 3:
        raise DomainError("need at least three grid points")
    if np.any(t <= 0):
        raise DomainError("grid points must be > 0")
    if not beta * V < 2.0:
        raise DomainError(f"need beta * V < 2, got {beta * V}")
    phi = k_function(np.sqrt(t), V, beta)
    slopes = np.diff(phi) / np.diff(t)
    second = np.diff(slopes) / (t[2:] - t[:-2])
    k_v = float(k_function(V, V, beta))
    k2 = k_second_derivative(np.sqrt(t), V, beta)
    passed = bool(np.all(second > 0) and abs(k_v) <= 1e-10 and np.all(k2 > 0))
    return ConvexityReport(passed, float(second.min()), k_v, float(k2.min()))


def random_measure_search(
    V: float, beta: float, trials: int, max_pairs: int = 6, rng: np.random.Generator | None = None
) -> float:
    """Smallest tilted mean found over random symmetric laws of ``S`` with variance ``V**2``.

    A falsification harness for the two-atom optimum, not a certificate.
    Returns the minimum of ``E_beta[S] - V tanh(beta V)``.
    """
    rng = rng or np.random.default_rng(0)
    worst = math.inf
    bound = V * math.tanh(beta * V)
    for _ in range(trials):
        k = int(rng.integers(1, max_pairs + 1))
        pos = rng.exponential(1.0, size=k)
        mass = rng.dirichlet(np.ones(k))
        pos *= V / math.sqrt(float(np.sum(mass * pos**2)))
        num = np.sum(mass * pos * np.sinh(beta * pos))
        den = np.sum(mass * np.cosh(beta * pos))
        worst = min(worst, float(num / den) - bound)
    return worst


@dataclass(frozen=True)
class TrialSummary:
    trials: int
    min_slack: float
    worst_measure: SymmetricMeasure | None
    worst_beta: float

    @property
    def passed(self) -> bool:
        return self.min_slack >= -SLACK_TOL


def random_symmetric_measure(rng: np.random.Generator, max_pairs: int = 6) -> SymmetricMeasure:
    """Random symmetric law with 1..max_pairs atom pairs and, half the time, an atom at 0."""
    k = int(rng.integers(1, max_pairs + 1))
    pos = rng.exponential(1.0, size=k) + 1e-3
    zero = float(rng.uniform(0.0, 0.5)) if rng.random() < 0.5 else 0.0
    mass = rng.dirichlet(np.ones(k)) * (1.0 - zero)
    return SymmetricMeasure.from_pairs(pos, mass, zero_mass=zero)


def tanh_bound_trials(
    trials: int = 1000, max_pairs: int = 6, rng: np.random.Generator | None = None
) -> TrialSummary:
    """Compare the tilted cross moment with ``m2 tanh(beta m2)`` on random laws.

    ``m2`` is the second moment of each random law and ``beta`` is drawn
    uniformly from ``(0, 2 / m2]`` so that ``beta * m2 <= 2``.
    """
    rng = rng or np.random.default_rng(0)
    worst = (math.inf, None, 0.0)
    for _ in range(trials):
        theta = random_symmetric_measure(rng, max_pairs)
        m2 = theta.second_moment()
        beta = float(2.0 / m2 * (1.0 - rng.random()))
        slack = tilted_cross_moment(theta, beta).value - m2 * math.tanh(beta * m2)
        if slack < worst[0]:
            worst = (slack, theta, beta)
    return TrialSummary(trials, worst[0], worst[1], worst[2])


# ---------------------------------------------------------------------------
# Two-block split measure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockCovarianceReport:
    T: int
    alpha: float
    c: float
    cross_moment: float
    V: float
    beta: float
    bound: float
    certified: bool

    @property
    def slack(self) -> float:
        return self.cross_moment - self.bound

    @property
    def passed(self) -> bool:
        return self.slack >= -SLACK_TOL


def split_spec(T: int, alpha: float, c: float) -> GibbsSpec:
    """Quadratic long-range walk with cross-block terms replaced by one tilt.

    Pairs inside ``[0, T/2]`` and inside ``[T/2, T]`` keep
    ``(x_j - x_i)**2 / (j - i)**(1 + c)``; all other cross terms are dropped
    and ``(sigma1 + sigma2)**2 / T**c`` is added, with ``sigma1, sigma2`` the
    half-walk sums normalized by ``sqrt(T/2)``.  That extra term is the pair
    ``(0, T)`` with weight ``2``, since ``(sigma1 + sigma2)**2 = 2 x_T**2 / T``.
    """
    if T < 2 or T % 2:
        raise DomainError(f"T must be even and >= 2, got {T}")
    h = T // 2
    pairs = [(i, j) for i in range(h) for j in range(i + 1, h + 1)]
    pairs += [(i, j) for i in range(h, T) for j in range(i + 1, T + 1)]
    pairs.append((0, T, 2.0))
    return GibbsSpec(1, T, alpha, PowerLaw(2, 1.0 + c), interaction_set=tuple(pairs))


def block_covariance_check(T: int, alpha: float, c: float, gamma: int = 2, workers: int = 1):
    """Exact ``E_split[sigma1 sigma2]`` against ``V tanh(alpha V / T**c)``.

    ``V`` is ``E[sigma1**2]`` under the full quadratic walk of horizon ``T/2``.
    Only ``gamma = 2`` is supported here; larger even ``gamma`` reduce to it
    through :func:`selfrepel.gks.check_gamma_reduction`.
    """
    if gamma != 2:
        raise DomainError("the split measure is defined for gamma = 2; reduce larger gamma first")
    if not 0 < c:
        raise DomainError(f"c must be > 0, got {c}")
    h = T // 2
    norm = math.sqrt(h)
    split = split_spec(T, alpha, c)
    cross = exact.expectation(split, BlockProduct((1, h), (h + 1, T), norm, norm), workers).value
    half = GibbsSpec(1, h, alpha, PowerLaw(2, 1.0 + c))
    V = exact.expectation(half, BlockProduct((1, h), (1, h), norm, norm), workers).value
    beta = alpha / T**c
    return BlockCovarianceReport(
        T=T,
        alpha=alpha,
        c=c,
        cross_moment=cross,
        V=V,
        beta=beta,
        bound=V * math.tanh(beta * V),
        certified=beta * V <= 2.0,
    )
