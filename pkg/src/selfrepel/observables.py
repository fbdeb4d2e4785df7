"""Path functionals evaluated on batches of increment arrays.

Every observable maps an array ``phi`` of shape ``(..., T, d)`` to an array of
shape ``(...)``.  Step and coordinate indices are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping

import numpy as np

from .errors import DomainError


class Observable:
    def values(self, phi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate(self, T: int, d: int) -> None:
        pass

    def label(self) -> str:
        raise NotImplementedError


def _check_step(k, T, what="step"):
    if not 1 <= k <= T:
        raise DomainError(f"{what} index {k} outside 1..{T}")


def _check_coord(p, d):
    if not 1 <= p <= d:
        raise DomainError(f"coordinate index {p} outside 1..{d}")


@dataclass(frozen=True)
class EndpointSquare(Observable):
    """``||x_T||**2``."""

    def values(self, phi):
        return np.sum(np.sum(phi, axis=-2) ** 2, axis=-1)

    def label(self):
        return "endpoint_square"


@dataclass(frozen=True)
class EndpointCoordinate(Observable):
    p: int = 1

    def values(self, phi):
        return np.sum(phi[..., self.p - 1], axis=-1)

    def validate(self, T, d):
        _check_coord(self.p, d)

    def label(self):
        return f"endpoint_coordinate[{self.p}]"


@dataclass(frozen=True)
class Monomial(Observable):
    """Product of ``phi[step, coord] ** exponent`` over ``factors``.

    Repeated (step, coord) entries are merged by adding exponents.  The empty
    monomial is the constant 1.
    """

    factors: tuple = ()

    def __post_init__(self):
        merged: dict[tuple[int, int], int] = {}
        for f in self.factors:
            step, coord, e = (int(v) for v in f)
            if e < 1:
                raise DomainError(f"monomial exponent must be >= 1, got {e}")
            merged[(step, coord)] = merged.get((step, coord), 0) + e
        object.__setattr__(self, "factors", tuple((s, c, e) for (s, c), e in sorted(merged.items())))

    @classmethod
    def of(cls, *steps: int, coord: int = 1) -> "Monomial":
        """``phi_{s1} * phi_{s2} * ...`` in one coordinate."""
        return cls(tuple((s, coord, 1) for s in steps))

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.factors + other.factors)

    @property
    def degree(self) -> int:
        return sum(e for _, _, e in self.factors)

    def is_odd_somewhere(self) -> bool:
        return any(e % 2 for _, _, e in self.factors)

    def values(self, phi):
        out = np.ones(phi.shape[:-2])
        for s, c, e in self.factors:
            out = out * phi[..., s - 1, c - 1] ** e
        return out

    def validate(self, T, d):
        for s, c, _ in self.factors:
            _check_step(s, T)
            _check_coord(c, d)

    def label(self):
        if not self.factors:
            return "monomial[]"
        return "monomial[" + ",".join(f"{s}.{c}^{e}" for s, c, e in self.factors) + "]"


@dataclass(frozen=True)
class PairEqualIndicator(Observable):
    """``1{phi_i = phi_j}`` in coordinate ``p``."""

    i: int
    j: int
    p: int = 1

    def values(self, phi):
        return (phi[..., self.i - 1, self.p - 1] == phi[..., self.j - 1, self.p - 1]).astype(float)

    def validate(self, T, d):
        _check_step(self.i, T)
        _check_step(self.j, T)
        _check_coord(self.p, d)

    def label(self):
        return f"pair_equal[{self.i},{self.j};{self.p}]"


@dataclass(frozen=True)
class WindowAllEqualIndicator(Observable):
    """``1{phi_i = phi_{i+1} = ... = phi_j}`` in coordinate ``p``."""

    i: int
    j: int
    p: int = 1

    def values(self, phi):
        window = phi[..., self.i - 1 : self.j, self.p - 1]
        return np.all(window == window[..., :1], axis=-1).astype(float)

    def validate(self, T, d):
        if self.j < self.i:
            raise DomainError(f"window [{self.i}, {self.j}] is empty")
        _check_step(self.i, T)
        _check_step(self.j, T)
        _check_coord(self.p, d)

    def label(self):
        return f"window_equal[{self.i}..{self.j};{self.p}]"


@dataclass(frozen=True)
class BlockProduct(Observable):
    """``(sum_{k in A} phi_k / norm_a) * (sum_{k in B} phi_k / norm_b)``.

    Blocks are inclusive step ranges ``(first, last)`` in coordinate ``p``.
    With ``A = B`` this is a normalized block second moment.
    """

    block_a: tuple
    block_b: tuple
    norm_a: float = 1.0
    norm_b: float = 1.0
    p: int = 1

    def __post_init__(self):
        object.__setattr__(self, "block_a", tuple(int(v) for v in self.block_a))
        object.__setattr__(self, "block_b", tuple(int(v) for v in self.block_b))

    def _block_sum(self, phi, block):
        first, last = block
        return np.sum(phi[..., first - 1 : last, self.p - 1], axis=-1)

    def values(self, phi):
        sa = self._block_sum(phi, self.block_a) / self.norm_a
        sb = self._block_sum(phi, self.block_b) / self.norm_b
        return sa * sb

    def validate(self, T, d):
        for first, last in (self.block_a, self.block_b):
            if last < first:
                raise DomainError(f"block ({first}, {last}) is empty")
            _check_step(first, T)
            _check_step(last, T)
        if not (self.norm_a > 0 and self.norm_b > 0):
            raise DomainError("block normalizations must be positive")
        _check_coord(self.p, d)

    def label(self):
        (a0, a1), (b0, b1) = self.block_a, self.block_b
        return f"block_product[{a0}..{a1}/{self.norm_a:g},{b0}..{b1}/{self.norm_b:g};{self.p}]"


def observable_from_dict(data: Mapping) -> Observable:
    kind = data.get("type")
    if kind == "endpoint_square":
        return EndpointSquare()
    if kind == "endpoint_coordinate":
        return EndpointCoordinate(p=data.get("p", 1))
    if kind == "monomial":
        return Monomial(tuple(tuple(f) for f in data["factors"]))
    if kind == "pair_equal":
        return PairEqualIndicator(data["i"], data["j"], data.get("p", 1))
    if kind == "window_equal":
        return WindowAllEqualIndicator(data["i"], data["j"], data.get("p", 1))
    if kind == "block_product":
        return BlockProduct(
            tuple(data["block_a"]),
            tuple(data["block_b"]),
            data.get("norm_a", 1.0),
            data.get("norm_b", 1.0),
            data.get("p", 1),
        )
    raise DomainError(f"unknown observable type {kind!r}")


_TYPE_NAMES = {
    EndpointSquare: "endpoint_square",
    EndpointCoordinate: "endpoint_coordinate",
    Monomial: "monomial",
    PairEqualIndicator: "pair_equal",
    WindowAllEqualIndicator: "window_equal",
    BlockProduct: "block_product",
}


def observable_to_dict(obs: Observable) -> dict:
    """Inverse of :func:`observable_from_dict`."""
    out: dict = {"type": _TYPE_NAMES[type(obs)]}
    for f in fields(obs):
        value = getattr(obs, f.name)
        if isinstance(value, tuple):
            value = [list(v) if isinstance(v, tuple) else v for v in value]
        out[f.name] = value
    return out
