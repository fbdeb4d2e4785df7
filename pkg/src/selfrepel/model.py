"""Pair potentials, Gibbs path-measure parameters and the energy functional.

A path of horizon ``T`` in ``d`` dimensions is encoded by its increments
``phi[j, p]`` (step ``j = 1..T``, coordinate ``p = 1..d``), each equal to
``+a`` or ``-a``.  The Gibbs weight of a path is ``exp(alpha * energy)`` where

    energy = sum over interacting pairs (i, j), 0 <= i < j <= T,
             of  weight_ij * W(x_j - x_i, j - i).

Public indices (steps, coordinates) are 1-based to match the usual
notation; arrays are 0-based internally.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
from numba import njit

from .errors import DomainError

# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


class PairPotential:
    """Base class for the interaction ``W(z, t)``."""

    def evaluate(self, z, t: int) -> float:
        raise NotImplementedError

    def is_even(self) -> bool:
        raise NotImplementedError

    def polynomial(self, t: int) -> tuple[int, np.ndarray]:
        """Return ``(q, c)`` with ``W(z, t) = sum_m c[m] * (sum_p z_p**q)**m``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CoefficientTable(PairPotential):
    """``W(z, t) = sum_i c[i, t] * (sum_p z_p**q)**i`` with finite support in t.

    ``coeffs`` maps ``(i, t)`` to ``c[i, t]``.  Lags without an entry contribute
    zero, so the nearest-step lag ``t = 1`` is off unless configured.  Negative
    coefficients are rejected unless ``signed=True``; signed tables are only
    meaningful after :func:`selfrepel.gks.signed_potential_admissible` has
    certified their spin expansion.
    """

    q: int
    coeffs: tuple = ()
    signed: bool = False

    def __post_init__(self):
        items = self.coeffs.items() if isinstance(self.coeffs, Mapping) else self.coeffs
        table = {}
        for key, c in items:
            i, t = (int(v) for v in key)
            table[(i, t)] = table.get((i, t), 0.0) + float(c)
        if int(self.q) != self.q or self.q < 1:
            raise DomainError(f"q must be a positive integer, got {self.q!r}")
        for (i, t), c in table.items():
            if i < 1 or t < 1:
                raise DomainError(f"coefficient index (i={i}, t={t}) must be positive")
            if not np.isfinite(c):
                raise DomainError(f"coefficient c[{i},{t}] is not finite")
            if c < 0 and not self.signed:
                raise DomainError(f"coefficient c[{i},{t}] = {c} is negative")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "coeffs", tuple(sorted(table.items())))

    @property
    def range(self) -> int:
        """Largest lag with a nonzero coefficient (0 for the empty table)."""
        lags = [t for (_, t), c in self.coeffs if c != 0.0]
        return max(lags, default=0)

    def coefficient(self, i: int, t: int) -> float:
        return dict(self.coeffs).get((i, t), 0.0)

    def polynomial(self, t: int):
        entries = [(i, c) for (i, tt), c in self.coeffs if tt == t]
        degree = max((i for i, _ in entries), default=0)
        poly = np.zeros(degree + 1)
        for i, c in entries:
            poly[i] += c
        return self.q, poly

    def evaluate(self, z, t: int) -> float:
        if t < 1:
            raise DomainError(f"lag t must be >= 1, got {t}")
        z = np.atleast_1d(np.asarray(z, dtype=float))
        s = float(np.sum(z ** self.q))
        return float(sum(c * s**i for (i, tt), c in self.coeffs if tt == t))

    def is_even(self) -> bool:
        return self.q % 2 == 0

    def to_dict(self) -> dict:
        out = {
            "type": "table",
            "q": self.q,
            "coeffs": [[i, t, c] for (i, t), c in self.coeffs],
        }
        if self.signed:
            out["signed"] = True
        return out


@dataclass(frozen=True)
class PowerLaw(PairPotential):
    """``W(z, t) = ||z||**gamma / t**xi`` with ``gamma`` even."""

    gamma: int
    xi: float

    def __post_init__(self):
        if int(self.gamma) != self.gamma or self.gamma <= 0 or int(self.gamma) % 2:
            raise DomainError(f"gamma must be an even positive integer, got {self.gamma!r}")
        if not self.xi > 0:
            raise DomainError(f"xi must be positive, got {self.xi!r}")
        object.__setattr__(self, "gamma", int(self.gamma))
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def range(self) -> float:
        return float("inf")

    def polynomial(self, t: int):
        if t < 1:
            raise DomainError(f"lag t must be >= 1, got {t}")
        poly = np.zeros(self.gamma // 2 + 1)
        poly[-1] = float(t) ** (-self.xi)
        return 2, poly

    def evaluate(self, z, t: int) -> float:
        if t < 1:
            raise DomainError(f"PowerLaw is undefined at lag t={t}")
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return float(np.sum(z * z) ** (self.gamma // 2) / float(t) ** self.xi)

    def is_even(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"type": "power", "gamma": self.gamma, "xi": self.xi}


def evaluate_W(z, t: int, potential: PairPotential) -> float:
    """Evaluate the pair potential at displacement ``z`` and lag ``t``."""
    return potential.evaluate(z, t)


def nearest_neighbor_quadratic(c: float = 1.0) -> CoefficientTable:
    """``W(z, 2) = c * ||z||**2`` and zero at every other lag."""
    return CoefficientTable(q=2, coeffs={(1, 2): c})


def potential_from_dict(data: Mapping) -> PairPotential:
    kind = data.get("type")
    if kind == "table":
        coeffs = {}
        for entry in data.get("coeffs", []):
            if len(entry) != 3:
                raise DomainError(f"table entries are [i, t, c], got {entry!r}")
            i, t, c = entry
            coeffs[(i, t)] = c
        return CoefficientTable(q=data["q"], coeffs=coeffs, signed=bool(data.get("signed", False)))
    if kind == "power":
        return PowerLaw(gamma=data["gamma"], xi=data["xi"])
    raise DomainError(f"unknown potential type {kind!r}; expected 'table' or 'power'")


# ---------------------------------------------------------------------------
# Measure parameters
# ---------------------------------------------------------------------------

PairEntry = Union[tuple[int, int], tuple[int, int, float]]


@dataclass(frozen=True)
class GibbsSpec:
    """Base walk, potential and coupling of a reweighted path measure.

    ``interaction_set`` restricts the energy to the listed pairs ``(i, j)``;
    an optional third entry scales that pair's term.  ``None`` means every
    pair ``0 <= i < j <= T`` with unit weight.
    """

    d: int
    T: int
    alpha: float
    potential: PairPotential
    step_amplitude: float = 1.0
    interaction_set: tuple | None = None

    def __post_init__(self):
        for name in ("d", "T"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (np.isfinite(self.step_amplitude) and self.step_amplitude > 0):
            raise DomainError(f"step amplitude must be > 0, got {self.step_amplitude!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "step_amplitude", float(self.step_amplitude))
        if self.interaction_set is not None:
            merged: dict[tuple[int, int], float] = {}
            for entry in self.interaction_set:
                i, j = int(entry[0]), int(entry[1])
                w = float(entry[2]) if len(entry) > 2 else 1.0
                if not 0 <= i < j <= self.T:
                    raise DomainError(f"pair ({i}, {j}) violates 0 <= i < j <= T={self.T}")
                if not (np.isfinite(w) and w >= 0):
                    raise DomainError(f"pair ({i}, {j}) has invalid weight {w!r}")
                merged[(i, j)] = merged.get((i, j), 0.0) + w
            object.__setattr__(
                self, "interaction_set", tuple((i, j, w) for (i, j), w in sorted(merged.items()))
            )

    @property
    def n_spins(self) -> int:
        return self.d * self.T

    def pairs(self) -> list[tuple[int, int, float]]:
        if self.interaction_set is None:
            return [(i, j, 1.0) for i in range(self.T) for j in range(i + 1, self.T + 1)]
        return list(self.interaction_set)

    def replace(self, **changes) -> "GibbsSpec":
        fields = dict(
            d=self.d,
            T=self.T,
            alpha=self.alpha,
            potential=self.potential,
            step_amplitude=self.step_amplitude,
            interaction_set=self.interaction_set,
        )
        fields.update(changes)
        return GibbsSpec(**fields)

    def to_dict(self) -> dict:
        out = {
            "d": self.d,
            "T": self.T,
            "alpha": self.alpha,
            "step_amplitude": self.step_amplitude,
            "potential": self.potential.to_dict(),
        }
        if self.interaction_set is not None:
            out["interaction_set"] = [list(p) for p in self.interaction_set]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "GibbsSpec":
        pairs = data.get("interaction_set")
        return cls(
            d=data.get("d", 1),
            T=data["T"],
            alpha=data["alpha"],
            potential=potential_from_dict(data["potential"]),
            step_amplitude=data.get("step_amplitude", 1.0),
            interaction_set=None if pairs is None else tuple(tuple(p) for p in pairs),
        )

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Compiled pair tables used by the numeric kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompiledEnergy:
    """Flat arrays describing every nonzero pair term.

    ``coef[m, r]`` is the coefficient of ``s**r`` for pair ``m`` where
    ``s = sum_p (x_J - x_I)_p ** q[m]``.  ``ptr``/``members`` list, for each
    step ``k`` (0-based), the pairs whose block contains that step.
    """

    d: int
    T: int
    I: np.ndarray
    J: np.ndarray
    q: np.ndarray
    coef: np.ndarray
    ptr: np.ndarray
    members: np.ndarray

    @property
    def n_pairs(self) -> int:
        return len(self.I)


def compile_energy(spec: GibbsSpec) -> CompiledEnergy:
    rows = []
    for i, j, w in spec.pairs():
        if w == 0.0:
            continue
        q, poly = spec.potential.polynomial(j - i)
        if not np.any(poly):
            continue
        rows.append((i, j, q, w * poly))
    width = max((len(r[3]) for r in rows), default=1)
    n = len(rows)
    I = np.zeros(n, dtype=np.int64)
    J = np.zeros(n, dtype=np.int64)
    q = np.ones(n, dtype=np.int64)
    coef = np.zeros((n, width))
    for m, (i, j, qq, poly) in enumerate(rows):
        I[m], J[m], q[m] = i, j, qq
        coef[m, : len(poly)] = poly
    # step k (0-based) lies in the block of pair m iff I[m] <= k < J[m]
    lists = [[] for _ in range(spec.T)]
    for m in range(n):
        for k in range(I[m], J[m]):
            lists[k].append(m)
    ptr = np.zeros(spec.T + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(l) for l in lists])
    members = np.array([m for l in lists for m in l], dtype=np.int64)
    return CompiledEnergy(spec.d, spec.T, I, J, q, coef, ptr, members)


@njit(cache=True, nogil=True)
def _ipow(z, n):
    r = 1.0
    for _ in range(n):
        r *= z
    return r


@njit(cache=True, nogil=True)
def _horner(coef, m, s):
    w = 0.0
    for r in range(coef.shape[1] - 1, -1, -1):
        w = w * s + coef[m, r]
    return w


@njit(cache=True, nogil=True)
def _full_energy(x, I, J, q, coef):
    d = x.shape[1]
    total = 0.0
    for m in range(I.shape[0]):
        s = 0.0
        for p in range(d):
            z = x[J[m], p] - x[I[m], p]
            s += _ipow(z, q[m])
        total += _horner(coef, m, s)
    return total


@njit(cache=True, nogil=True)
def _delta_flip(x, k, p, phi_kp, ptr, members, I, J, q, coef):
    """Energy change when the 0-based step ``k``, coordinate ``p`` is negated."""
    d = x.shape[1]
    delta = 0.0
    for n in range(ptr[k], ptr[k + 1]):
        m = members[n]
        s_old = 0.0
        s_new = 0.0
        for pp in range(d):
            z = x[J[m], pp] - x[I[m], pp]
            zq = _ipow(z, q[m])
            s_old += zq
            if pp == p:
                s_new += _ipow(z - 2.0 * phi_kp, q[m])
            else:
                s_new += zq
        delta += _horner(coef, m, s_new) - _horner(coef, m, s_old)
    return delta


@njit(cache=True, nogil=True)
def _apply_flip(phi, x, k, p):
    old = phi[k, p]
    phi[k, p] = -old
    for j in range(k + 1, x.shape[0]):
        x[j, p] -= 2.0 * old


@njit(cache=True, nogil=True)
def _energies_from_codes(codes, T, d, a, I, J, q, coef):
    n = codes.shape[0]
    out = np.empty(n)
    x = np.zeros((T + 1, d))
    for r in range(n):
        c = codes[r]
        for k in range(T):
            for p in range(d):
                bit = (c >> (k * d + p)) & 1
                x[k + 1, p] = x[k, p] + (a if bit else -a)
        out[r] = _full_energy(x, I, J, q, coef)
    return out


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpinPath:
    """Increments ``phi`` of shape ``(T, d)`` with values in ``{-a, +a}``."""

    increments: np.ndarray
    step_amplitude: float = 1.0
    positions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        phi = np.array(self.increments, dtype=float)
        if phi.ndim == 1:
            phi = phi[:, None]
        if phi.ndim != 2 or phi.shape[0] < 1:
            raise ValueError(f"increments must have shape (T, d), got {phi.shape}")
        a = float(self.step_amplitude)
        if not np.all(np.abs(phi) == a):
            raise DomainError(f"every increment must equal +/-{a}")
        phi.setflags(write=False)
        x = np.zeros((phi.shape[0] + 1, phi.shape[1]))
        np.cumsum(phi, axis=0, out=x[1:])
        x.setflags(write=False)
        object.__setattr__(self, "increments", phi)
        object.__setattr__(self, "step_amplitude", a)
        object.__setattr__(self, "positions", x)

    @property
    def T(self) -> int:
        return self.increments.shape[0]

    @property
    def d(self) -> int:
        return self.increments.shape[1]

    @classmethod
    def from_signs(cls, signs, step_amplitude: float = 1.0) -> "SpinPath":
        return cls(step_amplitude * np.asarray(signs, dtype=float), step_amplitude)

    @classmethod
    def from_code(cls, code: int, T: int, d: int = 1, step_amplitude: float = 1.0) -> "SpinPath":
        """Decode a configuration integer: bit ``(k-1)*d + (p-1)`` set means ``+a``."""
        bits = (int(code) >> np.arange(T * d)) & 1
        return cls.from_signs((2 * bits - 1).reshape(T, d), step_amplitude)

    def code(self) -> int:
        bits = (self.increments.ravel() > 0).astype(np.int64)
        return int(np.sum(bits << np.arange(bits.size, dtype=np.int64)))

    def flipped(self, k: int, p: int = 1) -> "SpinPath":
        phi = self.increments.copy()
        phi[k - 1, p - 1] *= -1
        return SpinPath(phi, self.step_amplitude)

    def __neg__(self) -> "SpinPath":
        return SpinPath(-self.increments, self.step_amplitude)


def _check_path(path: SpinPath, spec: GibbsSpec):
    if path.T != spec.T or path.d != spec.d:
        raise ValueError(
            f"path shape (T={path.T}, d={path.d}) does not match spec (T={spec.T}, d={spec.d})"
        )


def energy(path: SpinPath, spec: GibbsSpec, compiled: CompiledEnergy | None = None) -> float:
    """Pair-interaction sum without the ``alpha`` prefactor."""
    _check_path(path, spec)
    ce = compiled or compile_energy(spec)
    return float(_full_energy(path.positions, ce.I, ce.J, ce.q, ce.coef))


def delta_energy_flip(
    path: SpinPath, k: int, p: int, spec: GibbsSpec, compiled: CompiledEnergy | None = None
) -> float:
    """``energy(path with phi[k, p] negated) - energy(path)``, in O(pairs touching k)."""
    _check_path(path, spec)
    if not 1 <= k <= spec.T:
        raise IndexError(f"step index k={k} outside 1..{spec.T}")
    if not 1 <= p <= spec.d:
        raise IndexError(f"coordinate index p={p} outside 1..{spec.d}")
    ce = compiled or compile_energy(spec)
    return float(
        _delta_flip(
            path.positions,
            k - 1,
            p - 1,
            path.increments[k - 1, p - 1],
            ce.ptr,
            ce.members,
            ce.I,
            ce.J,
            ce.q,
            ce.coef,
        )
    )


def energies_for_codes(spec: GibbsSpec, codes: Sequence[int] | np.ndarray) -> np.ndarray:
    """From-scratch energies of the configurations encoded by ``codes``."""
    ce = compile_energy(spec)
    codes = np.asarray(codes, dtype=np.int64)
    return _energies_from_codes(codes, spec.T, spec.d, spec.step_amplitude, ce.I, ce.J, ce.q, ce.coef)


def iter_pairs_with_lag(T: int, lags: Iterable[int]) -> list[tuple[int, int]]:
    """All pairs ``(i, i + t)`` inside ``0..T`` for the given lags."""
    return [(i, i + t) for t in lags for i in range(T - t + 1)]
