"""Dyadic block-variance recursion and its phase diagram.

    V_1 = 1,   V_{n+1} = (1 + tanh(min(alpha * 2**(-c n) * V_n, 2))) * V_n

In the rescaled variable ``y_n = alpha * 2**(-c n) * V_n`` the map is
``y -> 2**(-c) * (1 + tanh(min(y, 2))) * y``; it saturates at the growth
factor ``2**(-c) * (1 + tanh 2)``, which exceeds one exactly when
``c < log2(1 + tanh 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError

LN2 = math.log(2.0)
LOG_SWITCH = math.log(1e300)
MAX_LEVELS = 10**4
DIVERGENCE_HORIZON = 1000
BOUNDARY_RTOL = 1e-12


def c_crit() -> float:
    """``log2(1 + tanh 2)``, the largest decay offset with a growing saturated map."""
    return math.log2(1.0 + math.tanh(2.0))


def saturated_gain(c: float) -> float:
    """``g_c^sat = 2**(-c) * (1 + tanh 2)``."""
    return 2.0 ** (-c) * (1.0 + math.tanh(2.0))


def gain(y: float, c: float, clamp: bool = True) -> float:
    """``g_c(y) = 2**(-c) * (1 + tanh(min(y, 2)))``."""
    return 2.0 ** (-c) * (1.0 + math.tanh(min(y, 2.0) if clamp else y))


def alpha_star(c: float) -> float:
    """Critical coupling ``2**c * artanh(2**c - 1)`` for ``0 < c < c_crit``."""
    if not 0.0 < c < c_crit():
        raise DomainError(f"alpha_star needs 0 < c < c_crit = {c_crit():.6f}, got c = {c}")
    return 2.0**c * math.atanh(2.0**c - 1.0)


@dataclass(frozen=True)
class RecursionState:
    """Level ``n`` with ``log V_n`` and ``y_n``.

    ``V`` (and ``y``) are reported as ``inf`` once they leave double range;
    ``log_V`` is always finite.
    """

    n: int
    log_V: float
    y: float

    @property
    def V(self) -> float:
        return math.exp(self.log_V) if self.log_V < 709.0 else math.inf


def iterate_recursion(alpha: float, c: float, n_max: int, clamp: bool = True) -> list[RecursionState]:
    """States ``n = 1..n_max`` of the recursion started from ``V_1 = 1``.

    ``clamp=False`` drops the ``min(., 2)``; that variant is exploratory and
    carries none of the guarantees of the clamped map.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if not c > 0:
        raise DomainError(f"c must be > 0, got {c}")
    if not 1 <= n_max <= MAX_LEVELS:
        raise DomainError(f"n_max must lie in 1..{MAX_LEVELS}, got {n_max}")
    log_alpha = math.log(alpha)
    V = 1.0
    log_V = 0.0
    states = []
    for n in range(1, n_max + 1):
        scale = 2.0 ** (-c * n)
        if log_V < LOG_SWITCH and scale > 1e-300:
            y = alpha * scale * V
        else:
            log_y = log_alpha - c * n * LN2 + log_V
            y = math.exp(log_y) if log_y < 709.0 else math.inf
        states.append(RecursionState(n, log_V, y))
        factor = 1.0 + math.tanh(min(y, 2.0) if clamp else y)
        if log_V < LOG_SWITCH:
            V *= factor
            log_V = math.log(V)
        else:
            log_V += math.log(factor)
    return states


@dataclass(frozen=True)
class PhasePoint:
    alpha: float
    c: float
    classification: str
    growth_ratio: float
    n_reached: int
    iteration_agrees: bool | None
    boundary: bool = False

    @property
    def log2_ratio(self) -> float:
        return math.log2(self.growth_ratio)


def classify_phase(alpha: float, c: float, n_max: int = DIVERGENCE_HORIZON) -> PhasePoint:
    """Divergent iff ``alpha > alpha_star(c)``, cross-checked by iterating the map.

    A divergent point must push ``y_n`` above 2 within ``n_max`` levels and a
    bounded point must have ``y_n`` decreasing from the first step;
    ``iteration_agrees`` is ``None`` when neither happens in time.
    ``n_reached`` is the first level with ``y_n > 2`` (or ``n_max``) and
    ``growth_ratio`` is ``V_{n+1} / V_n`` at the last level computed.
    """
    a_star = alpha_star(c)
    boundary = abs(alpha - a_star) <= BOUNDARY_RTOL * a_star
    classification = "divergent" if alpha > a_star else "bounded"
    states = iterate_recursion(alpha, c, n_max + 1)
    crossed = next((s.n for s in states if s.y > 2.0), None)
    decreasing = all(b.y < a.y for a, b in zip(states, states[1:]))
    if classification == "divergent":
        agrees = True if crossed is not None else None
        if decreasing:
            agrees = False
    else:
        agrees = decreasing and crossed is None
    ratio = math.exp(states[-1].log_V - states[-2].log_V)
    return PhasePoint(
        alpha=alpha,
        c=c,
        classification="boundary" if boundary else classification,
        growth_ratio=ratio,
        n_reached=crossed if crossed is not None else n_max,
        iteration_agrees=None if boundary else agrees,
        boundary=boundary,
    )


def phase_diagram(alphas: Iterable[float], cs: Iterable[float], n_max: int = DIVERGENCE_HORIZON):
    cs = list(cs)
    return [classify_phase(a, c, n_max) for a in alphas for c in cs]


def theorem2_exponent() -> float:
    """Growth exponent ``1 + c_crit`` of the mean-square displacement lower bound."""
    return 1.0 + c_crit()


def msd_exponent_estimate(alpha: float, c: float, n: int) -> float:
    """``log2(T * V_n) / log2(T)`` at ``T = 2**n``."""
    state = iterate_recursion(alpha, c, n)[-1]
    return (n + state.log_V / LN2) / n


@dataclass(frozen=True)
class CouplingExponent:
    s: float
    xi_c: float
    convergent: bool
    label: str = "HEURISTIC"


def effective_coupling_exponent(gamma: int, xi: float) -> CouplingExponent:
    """Tail exponent ``s = xi - gamma/2 - 1`` of the induced two-spin coupling.

    The pair-coefficient sum behind it converges only for ``xi > gamma/2 + 1``;
    outside that range ``convergent`` is False.  ``xi_c = 3 + gamma/2`` marks
    ``s = 2``.  Heuristic only.
    """
    if int(gamma) != gamma or gamma <= 0 or gamma % 2:
        raise DomainError(f"gamma must be an even positive integer, got {gamma}")
    k = gamma // 2
    return CouplingExponent(s=xi - k - 1.0, xi_c=3.0 + k, convergent=xi > k + 1)
