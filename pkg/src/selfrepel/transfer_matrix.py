"""Closed forms for the nearest-neighbour chain and block transfer matrices for finite range.

With ``W(z, 2) = z**2`` only, ``(phi + phi')**2 = 2 + 2 phi phi'`` for unit
spins, so the path measure at coupling ``alpha`` is the free-boundary Ising
chain at ``beta_eff = 2 * alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError
from .model import CoefficientTable

MAX_RANGE = 4
MAX_HORIZON = 10**6


@dataclass(frozen=True)
class IsingParams:
    beta_eff: float

    def __post_init__(self):
        if not self.beta_eff >= 0:
            raise DomainError(f"beta_eff must be >= 0, got {self.beta_eff!r}")

    @classmethod
    def from_alpha(cls, alpha: float, c: float = 1.0, step_amplitude: float = 1.0) -> "IsingParams":
        """Ising coupling of ``W(z, 2) = c * z**2`` at coupling ``alpha``."""
        return cls(2.0 * alpha * c * step_amplitude**2)

    @property
    def t(self) -> float:
        return math.tanh(self.beta_eff)

    @property
    def eigenvalues(self) -> tuple[float, float]:
        return 2.0 * math.cosh(self.beta_eff), 2.0 * math.sinh(self.beta_eff)


def ising_two_point(params: IsingParams, r: int) -> float:
    """``<sigma_i sigma_{i+r}> = tanh(beta)**r``."""
    if r < 0:
        raise DomainError(f"distance must be >= 0, got {r}")
    return params.t**r


def susceptibility(params: IsingParams) -> float:
    """``sum_k <sigma_0 sigma_k> = (1 + t) / (1 - t)``.

    ``1 - t`` is formed as ``2 / (1 + exp(2 beta))`` to avoid the cancellation
    in ``1 - tanh(beta)``; the result overflows to ``inf`` only where
    ``exp(2 beta)`` does.
    """
    b = params.beta_eff
    if b > 350.0:
        try:
            return math.exp(2.0 * b)
        except OverflowError:
            return math.inf
    e2 = math.exp(2.0 * b)
    one_minus_t = 2.0 / (1.0 + e2)
    one_plus_t = 2.0 * e2 / (1.0 + e2)
    return one_plus_t / one_minus_t


def finite_chain_msd(params: IsingParams, T: int) -> float:
    """``sum_{i,j<=T} <sigma_i sigma_j> = T + 2 sum_{r<T} (T - r) t**r`` on a free chain."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    r = np.arange(1, T, dtype=float)
    return float(T + 2.0 * np.sum((T - r) * params.t**r))


# ---------------------------------------------------------------------------
# Banded potentials
# ---------------------------------------------------------------------------


def _block_states(n: int) -> np.ndarray:
    """All sign vectors of length ``n``; row ``s`` has bit ``k`` of ``s`` at column ``k``."""
    if n == 0:
        return np.zeros((1, 0))
    bits = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(float)


def _terms_ending_in(spins: np.ndarray, first_new: int, potential: CoefficientTable, a: float):
    """Energy of every pair whose block ends at a column ``>= first_new``."""
    energy = np.zeros(spins.shape[0])
    width = spins.shape[1]
    for t in range(1, potential.range + 1):
        q, poly = potential.polynomial(t)
        if not np.any(poly):
            continue
        for end in range(max(first_new, t - 1), width):
            z = a * spins[:, end - t + 1 : end + 1].sum(axis=1)
            s = z**q
            energy += np.polyval(poly[::-1], s)
    return energy


@dataclass(frozen=True, eq=False)
class BandedTransferOperator:
    """Block transfer matrices for a CoefficientTable of range ``R``.

    Steps are grouped into blocks of ``R`` spins (the first block may be
    shorter).  Every pair term spans at most two consecutive blocks, so the
    Gibbs weight factorizes into ``initial[s_1] * prod M[s_b, s_{b+1}]``.
    Entries are stored after a common shift of the log-weights; the shift
    cancels in every ratio.
    """

    R: int
    first_size: int
    initial: np.ndarray
    first_matrix: np.ndarray | None
    matrix: np.ndarray
    first_sums: np.ndarray
    sums: np.ndarray
    n_full: int

    @classmethod
    def build(cls, potential: CoefficientTable, alpha: float, T: int, step_amplitude: float = 1.0):
        if not isinstance(potential, CoefficientTable):
            raise DomainError("banded transfer operators need a CoefficientTable potential")
        R = max(potential.range, 1)
        if R > MAX_RANGE:
            raise CapacityError(f"range R = {R} exceeds the banded cap {MAX_RANGE}")
        if not 1 <= T <= MAX_HORIZON:
            raise CapacityError(f"T must lie in 1..{MAX_HORIZON}, got {T}")
        a = step_amplitude
        first = T % R or R
        n_full = (T - first) // R

        s0 = _block_states(first)
        log_init = alpha * _terms_ending_in(s0, 0, potential, a)

        def log_matrix(prev):
            sp = _block_states(prev)
            sn = _block_states(R)
            joint = np.concatenate(
                [np.repeat(sp, len(sn), axis=0), np.tile(sn, (len(sp), 1))], axis=1
            )
            return (alpha * _terms_ending_in(joint, prev, potential, a)).reshape(len(sp), len(sn))

        def positive(logm):
            return np.exp(logm - np.max(logm))

        first_matrix = positive(log_matrix(first)) if n_full and first != R else None
        matrix = positive(log_matrix(R))
        return cls(
            R=R,
            first_size=first,
            initial=positive(log_init),
            first_matrix=first_matrix,
            matrix=matrix,
            first_sums=a * s0.sum(axis=1),
            sums=a * _block_states(R).sum(axis=1),
            n_full=n_full,
        )


@njit(cache=True)
def _propagate(f0, f1, f2, M, S, steps):
    f0 = f0.copy()
    f1 = f1.copy()
    f2 = f2.copy()
    for _ in range(steps):
        g0 = f0 @ M
        g1 = f1 @ M
        g2 = f2 @ M
        f2 = g2 + 2.0 * S * g1 + S * S * g0
        f1 = g1 + S * g0
        f0 = g0
        z = f0.sum()
        f0 /= z
        f1 /= z
        f2 /= z
    return f0, f1, f2


def banded_msd(potential: CoefficientTable, alpha: float, T: int, step_amplitude: float = 1.0) -> float:
    """``E[x_T**2]`` for a one-dimensional walk with a finite-range potential.

    The forward vector is augmented with its first two derivatives in a source
    ``h`` coupled to ``x_T``: ``(Z, Z', Z'')`` at ``h = 0`` gives
    ``E[x_T**2] = Z'' / Z``.
    """
    op = BandedTransferOperator.build(potential, alpha, T, step_amplitude)
    S0 = op.first_sums
    f0 = op.initial / op.initial.sum()
    f1 = S0 * f0
    f2 = S0 * S0 * f0
    steps = op.n_full
    if op.first_matrix is not None:
        f0, f1, f2 = _propagate(f0, f1, f2, op.first_matrix, op.sums, 1)
        steps -= 1
    f0, f1, f2 = _propagate(f0, f1, f2, op.matrix, op.sums, steps)
    return float(f2.sum() / f0.sum())


def banded_msd_per_step(potential: CoefficientTable, alpha: float, T: int) -> float:
    return banded_msd(potential, alpha, T) / T
