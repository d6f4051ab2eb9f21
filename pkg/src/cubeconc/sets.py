"""Set enlargements, the concentration function, and distance-to-set bounds.

Sets are boolean membership vectors over the 2^n indices (same bit order as
:mod:`cubeconc.cube`). ``distance_field`` computes d(x, A) for every x by
splitting A on its last coordinate,

    d(x, A) = min(d(x', A_{x_n}), d(x', A_{1 - x_n}) + 1),

and ``set_distance`` is the direct minimum over members; the two are tested
against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .cube import (
    ALPHA_EXACT_MAX_N,
    ALPHA_HEURISTIC_MAX_N,
    DENSE_MAX_N,
    CubePoint,
    InvalidParameter,
    NotApplicable,
    as_point,
    check_capacity,
)
from .dist import CubeDistribution, marginal
from .hamming import REL_TOL, _check_t, rel_slack

HALF_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CubeSet:
    n: int
    members: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.members, dtype=bool)
        if m.shape != (1 << self.n,):
            raise InvalidParameter(f"membership vector must have length 2^{self.n}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "CubeSet":
        check_capacity(n, DENSE_MAX_N, "CubeSet")
        m = np.zeros(1 << n, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= (1 << n)):
            raise InvalidParameter(f"member index out of range for n={n}")
        m[idx] = True
        return cls(n, m)

    @classmethod
    def from_points(cls, n: int, points) -> "CubeSet":
        return cls.from_indices(n, (as_point(p, n).index for p in points))

    @classmethod
    def from_hex(cls, n: int, bitmask_hex: str) -> "CubeSet":
        """Bit i of the integer is the membership of index i."""
        value = int(bitmask_hex, 16)
        if value >> (1 << n):
            raise InvalidParameter(f"bitmask has bits beyond 2^{n} indices")
        return cls.from_indices(n, (i for i in range(1 << n) if (value >> i) & 1))

    @classmethod
    def full(cls, n: int) -> "CubeSet":
        return cls(n, np.ones(1 << n, dtype=bool))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, density: Optional[float] = None) -> "CubeSet":
        """Random nonempty set; each point kept with probability ``density``
        (itself uniform on (0, 1) when not given)."""
        if density is None:
            density = float(rng.uniform(0.05, 0.95))
        m = rng.uniform(size=1 << n) < density
        if not m.any():
            m[rng.integers(1 << n)] = True
        return cls(n, m)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def __len__(self) -> int:
        return int(self.members.sum())

    def __contains__(self, x) -> bool:
        return bool(self.members[as_point(x, self.n).index])

    def is_empty(self) -> bool:
        return not self.members.any()

    def measure(self, mu: CubeDistribution) -> float:
        return float(mu.probs()[self.members].sum())

    def split_last(self) -> tuple:
        """(A_0, A_1) over I_{n-1}: members ending in 0, members ending in 1."""
        if self.n < 1:
            raise InvalidParameter("cannot split a set in I_0")
        return CubeSet(self.n - 1, self.members[0::2]), CubeSet(self.n - 1, self.members[1::2])

    def to_json(self) -> dict:
        return {"n": self.n, "members": [int(i) for i in self.indices]}

    def to_hex(self) -> str:
        value = 0
        for i in self.indices:
            value |= 1 << int(i)
        return format(value, "x")

    def __eq__(self, other) -> bool:
        return isinstance(other, CubeSet) and self.n == other.n and bool(np.array_equal(self.members, other.members))

    def __repr__(self) -> str:
        return f"CubeSet(n={self.n}, size={len(self)})"


def cubeset_from_json(data: dict) -> CubeSet:
    n = int(data["n"])
    if "members" in data:
        return CubeSet.from_indices(n, data["members"])
    if "bitmask_hex" in data:
        return CubeSet.from_hex(n, data["bitmask_hex"])
    raise InvalidParameter("CubeSet JSON needs 'members' or 'bitmask_hex'")


def _require_nonempty(A: CubeSet) -> None:
    if A.is_empty():
        raise InvalidParameter("the set A must be nonempty")


# -- distances -------------------------------------------------------------------------

def set_distance(x, A: CubeSet) -> int:
    """min over a in A of d_H(x, a)."""
    _require_nonempty(A)
    x = as_point(x, A.n)
    return int(np.bitwise_count(A.indices ^ x.index).min())


def _field(members: np.ndarray) -> np.ndarray:
    if members.size == 1:
        return np.where(members, 0.0, np.inf)
    d0 = _field(members[0::2])
    d1 = _field(members[1::2])
    out = np.empty(members.size)
    out[0::2] = np.minimum(d0, d1 + 1)
    out[1::2] = np.minimum(d1, d0 + 1)
    return out


def distance_field(A: CubeSet) -> np.ndarray:
    """d(x, A) for every x in I_n (int64), via the last-coordinate recursion."""
    _require_nonempty(A)
    return _field(A.members).astype(np.int64)


def enlargement(A: CubeSet, eps: int) -> CubeSet:
    """A_eps = {x : d(x, A) <= eps}."""
    if eps < 0:
        raise InvalidParameter("eps must be nonnegative")
    return CubeSet(A.n, distance_field(A) <= eps)


# -- concentration function ---------------------------------------------------------------

def _grow(masks: np.ndarray, n: int, eps: int) -> np.ndarray:
    """One-step neighbor closure applied eps times to each row of a membership matrix."""
    idx = np.arange(1 << n)
    for _ in range(min(eps, n)):
        grown = masks.copy()
        for i in range(n):
            grown |= masks[:, idx ^ (1 << i)]
        masks = grown
    return masks


def concentration_alpha(mu: CubeDistribution, eps: int) -> float:
    """1 - min{ mu(A_eps) : mu(A) >= 1/2 } over every subset A of I_n (n <= 4).

    mu(A) >= 1/2 is tested with an absolute slack of 1e-12.
    """
    if eps < 0:
        raise InvalidParameter("eps must be nonnegative")
    n = mu.n
    check_capacity(n, ALPHA_EXACT_MAX_N, "concentration_alpha")
    p = mu.probs()
    size = 1 << n
    codes = np.arange(1 << size, dtype=np.int64)
    masks = ((codes[:, None] >> np.arange(size)) & 1).astype(bool)
    big = masks @ p >= 0.5 - HALF_TOL
    grown = _grow(masks[big], n, eps)
    return float(max(0.0, 1.0 - (grown @ p).min()))


def alpha_lower_bound(mu: CubeDistribution, eps: int, centers: Optional[Iterable[int]] = None) -> float:
    """A lower bound on the concentration function for 5 <= n <= 12.

    For each center z, points are added nearest-first (heavier points first
    within a distance shell) until the set reaches mass 1/2; every such A
    certifies alpha >= 1 - mu(A_eps). This is a heuristic bound, not alpha.
    """
    n = mu.n
    check_capacity(n, ALPHA_HEURISTIC_MAX_N, "alpha_lower_bound")
    p = mu.probs()
    idx = np.arange(1 << n)
    best = 0.0
    for z in (idx if centers is None else centers):
        d = np.bitwise_count(idx ^ int(z))
        order = np.lexsort((-p, d))
        cum = np.cumsum(p[order])
        cut = int(np.searchsorted(cum, 0.5 - HALF_TOL)) + 1
        members = np.zeros(1 << n, dtype=bool)
        members[order[:cut]] = True
        grown = enlargement(CubeSet(n, members), eps)
        best = max(best, 1.0 - float(p[grown.members].sum()))
    return best


class MedianCheck(NamedTuple):
    lhs: float
    rhs: float
    median: int

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - REL_TOL


def hamming_median(mu: CubeDistribution, y) -> int:
    """Smallest m with mu(d_H(., y) <= m) >= 1/2; both median inequalities are asserted."""
    y = as_point(y, mu.n)
    p = mu.probs()
    d = np.bitwise_count(np.arange(p.size) ^ y.index).astype(np.int64)
    for m in range(mu.n + 1):
        if p[d <= m].sum() >= 0.5 - HALF_TOL:
            break
    assert p[d >= m].sum() >= 0.5 - HALF_TOL, "median upper condition failed"
    return m


def median_concentration_check(mu: CubeDistribution, y, eps: int) -> MedianCheck:
    """mu{|d_H(x, y) - M| <= eps} against 1 - 2 alpha(eps), M the median of d_H(., y)."""
    y = as_point(y, mu.n)
    alpha = concentration_alpha(mu, eps)
    m = hamming_median(mu, y)
    p = mu.probs()
    d = np.bitwise_count(np.arange(p.size) ^ y.index).astype(np.int64)
    lhs = float(p[np.abs(d - m) <= eps].sum())
    return MedianCheck(lhs, 1.0 - 2.0 * alpha, m)


# -- uniform conditional bound -------------------------------------------------------------

def conditional_sup_bounds(mu: CubeDistribution) -> list:
    """[c_2, ..., c_n]: largest conditional probability of either bit over
    positive-mass prefixes."""
    out = []
    for k in range(2, mu.n + 1):
        p0, defined = mu.conditional_p0(k, np.arange(1 << (k - 1), dtype=np.int64))
        p0 = p0[defined]
        out.append(float(np.maximum(p0, 1.0 - p0).max()))
    return out


def cosh_factor(t: float) -> float:
    """2 + e^t + e^{-t}."""
    return 2.0 + 2.0 * math.cosh(t)


@dataclass(frozen=True)
class SetDistanceBound:
    t: float
    mu_A: float
    c: tuple
    lhs: float
    mid: float
    outer: float
    hypothesis_ok: bool
    passed: bool

    @property
    def c_prod(self) -> float:
        return math.prod(ck * ck for ck in self.c)


def lipschitz_set_bound(mu: CubeDistribution, A: CubeSet, t: float) -> SetDistanceBound:
    """int e^{t d(x, A)} dmu against

    mid   = (1/mu(A)) (1/2 + (e^t + e^{-t})/4) prod_k c_k^2 (2 + e^t + e^{-t})^{n-1}
    outer = (1/mu(A)) 4^{n-1} prod_k c_k^2 e^{t^2 n/4}

    The chain lhs <= mid <= outer is only asserted when mu(x_1 = 0) = 1/2.
    """
    t = _check_t(t)
    _require_nonempty(A)
    if A.n != mu.n:
        raise InvalidParameter(f"set has n={A.n}, distribution has n={mu.n}")
    n = mu.n
    p = mu.probs()
    lhs = float(np.dot(p, np.exp(t * distance_field(A))))
    mu_a = A.measure(mu)
    c = conditional_sup_bounds(mu)
    c_prod = math.prod(ck * ck for ck in c)
    if mu_a > 0:
        mid = (0.5 + math.cosh(t) / 2) * c_prod * cosh_factor(t) ** (n - 1) / mu_a
        outer = 4.0 ** (n - 1) * c_prod * math.exp(t * t * n / 4) / mu_a
    else:
        mid = outer = math.inf
    hyp = abs(marginal(mu, 1).p0 - 0.5) <= 1e-9
    chain = rel_slack(lhs, mid) >= -REL_TOL and rel_slack(mid, outer) >= -REL_TOL
    return SetDistanceBound(t, mu_a, tuple(c), lhs, mid, outer, hyp, chain or not hyp)


# -- the two-variable maximization in the induction step ---------------------------------------

def minmax_value(a0, a1, c_n: float, t: float):
    """c_n min(1/a0, e^t/a1) + c_n min(1/a1, e^t/a0), with 1/0 = inf."""
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    et = math.exp(t)
    with np.errstate(divide="ignore"):
        inv0 = np.where(a0 > 0, 1.0 / np.where(a0 > 0, a0, 1.0), np.inf)
        inv1 = np.where(a1 > 0, 1.0 / np.where(a1 > 0, a1, 1.0), np.inf)
    return c_n * np.minimum(inv0, et * inv1) + c_n * np.minimum(inv1, et * inv0)


class MinMaxPoint(NamedTuple):
    a0: float
    a1: float
    value: float


def minmax_maximizer(c_n: float, t: float) -> MinMaxPoint:
    """Closed-form maximizer on a0 + a1 = 1/c_n: a0 = e^t / (c_n (1 + e^t))."""
    et = math.exp(t)
    a0 = et / (c_n * (1 + et))
    a1 = 1 / (c_n * (1 + et))
    return MinMaxPoint(a0, a1, c_n * c_n * cosh_factor(t))


def minmax_grid_search(c_n: float, t: float, points: int = 2001, rounds: int = 12,
                       ordered: bool = True) -> MinMaxPoint:
    """Maximize minmax_value along a0 + a1 = 1/c_n by repeatedly zoomed grids.

    The objective is symmetric in (a0, a1); with ``ordered`` the search is
    restricted to a0 >= a1, the branch the closed form describes.
    """
    s = 1.0 / c_n
    lo, hi = (s / 2 if ordered else 0.0), s
    best = None
    for _ in range(rounds):
        a0 = np.linspace(lo, hi, points)
        v = minmax_value(a0, s - a0, c_n, t)
        v = np.where(np.isfinite(v), v, -np.inf)
        i = int(np.argmax(v))
        if best is None or v[i] >= best.value:
            best = MinMaxPoint(float(a0[i]), float(s - a0[i]), float(v[i]))
        step = (hi - lo) / (points - 1)
        lo, hi = max(lo, a0[i] - 2 * step), min(hi, a0[i] + 2 * step)
    return best


# -- product-measure baseline -----------------------------------------------------------------

class TalagrandCheck(NamedTuple):
    lhs: float
    bound: float

    @property
    def holds(self) -> bool:
        return rel_slack(self.lhs, self.bound) >= -REL_TOL


def talagrand_product_baseline(mu: CubeDistribution, A: CubeSet, t: float) -> TalagrandCheck:
    """int e^{t d(x, A)} dmu <= e^{t^2 n / 4} / mu(A), for product measures only."""
    t = _check_t(t)
    if not mu.is_product:
        raise NotApplicable("the product-measure baseline needs a product-backed distribution")
    _require_nonempty(A)
    p = mu.probs()
    lhs = float(np.dot(p, np.exp(t * distance_field(A))))
    mu_a = A.measure(mu)
    bound = math.exp(t * t * mu.n / 4) / mu_a if mu_a > 0 else math.inf
    return TalagrandCheck(lhs, bound)
