"""Points of the Boolean cube and shared capacity limits.

Index convention: ``index = sum_k x_k * 2**(n-k)``, so ``x_1`` is the most
significant bit and every prefix ``(x_1, ..., x_k)`` of a point is
``index >> (n - k)``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Union

MAX_DIM = 63

# default caps, all overridable with CUBECONC_MAX_N
DENSE_MAX_N = 24
RANDOM_DENSE_MAX_N = 12
COUNT_MAX_N = 12
ALPHA_EXACT_MAX_N = 4
ALPHA_HEURISTIC_MAX_N = 12

ENV_MAX_N = "CUBECONC_MAX_N"


class InvalidParameter(ValueError):
    pass


class CapacityError(ValueError):
    pass


class NotApplicable(ValueError):
    pass


def capacity(default: int) -> int:
    """Return the effective cap, honouring the CUBECONC_MAX_N override."""
    raw = os.environ.get(ENV_MAX_N)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


def check_capacity(n: int, default: int, what: str) -> None:
    cap = capacity(default)
    if n > cap:
        raise CapacityError(f"{what}: n={n} exceeds cap {cap} (set {ENV_MAX_N} to override)")


@dataclass(frozen=True, order=True)
class CubePoint:
    n: int
    index: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_DIM:
            raise InvalidParameter(f"dimension must be in [0, {MAX_DIM}], got {self.n}")
        if not 0 <= self.index < (1 << self.n):
            raise InvalidParameter(f"index {self.index} out of range for n={self.n}")

    @classmethod
    def from_bits(cls, bits: Union[str, Iterable[int]]) -> "CubePoint":
        if isinstance(bits, str):
            bits = bits.strip()
            if any(ch not in "01" for ch in bits):
                raise InvalidParameter(f"not a bit-string: {bits!r}")
            seq = [int(ch) for ch in bits]
        else:
            seq = [int(b) for b in bits]
            if any(b not in (0, 1) for b in seq):
                raise InvalidParameter(f"bits must be 0/1, got {seq}")
        index = 0
        for b in seq:
            index = (index << 1) | b
        return cls(len(seq), index)

    @classmethod
    def zeros(cls, n: int) -> "CubePoint":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "CubePoint":
        return cls(n, (1 << n) - 1)

    def bit(self, k: int) -> int:
        """Coordinate ``x_k`` (1-based)."""
        if not 1 <= k <= self.n:
            raise InvalidParameter(f"coordinate {k} out of range for n={self.n}")
        return (self.index >> (self.n - k)) & 1

    @property
    def bits(self) -> tuple:
        return tuple(self.bit(k) for k in range(1, self.n + 1))

    def prefix(self, k: int) -> "CubePoint":
        if not 0 <= k <= self.n:
            raise InvalidParameter(f"prefix length {k} out of range for n={self.n}")
        return CubePoint(k, self.index >> (self.n - k))

    def complement(self) -> "CubePoint":
        return CubePoint(self.n, self.index ^ ((1 << self.n) - 1))

    def weight(self) -> int:
        return self.index.bit_count()

    def __str__(self) -> str:
        return format(self.index, f"0{self.n}b") if self.n else ""


def hamming(x: CubePoint, y: CubePoint) -> int:
    if x.n != y.n:
        raise InvalidParameter(f"dimension mismatch: {x.n} vs {y.n}")
    return (x.index ^ y.index).bit_count()


def as_point(y, n: int) -> CubePoint:
    """Coerce a bit-string, bit sequence, or CubePoint to a point of I_n."""
    if isinstance(y, CubePoint):
        p = y
    elif isinstance(y, int):
        p = CubePoint(n, y)
    else:
        p = CubePoint.from_bits(y)
    if p.n != n:
        raise InvalidParameter(f"dimension mismatch: point has n={p.n}, expected {n}")
    return p
