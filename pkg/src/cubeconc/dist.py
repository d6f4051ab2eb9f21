"""Probability distributions on I_n = {0,1}^n.

Four backings share one interface: ``dense`` (explicit table of 2^n masses),
``product`` (independent coordinates), ``markov`` (two-state chain along the
coordinates) and ``delta_mix`` (two atoms at 0...0 / 1...1 plus a uniform
remainder). Generator backings answer marginals, prefix masses and
conditionals in closed form and materialize a dense table on demand.

Distributions are immutable once built; the cached tables are written once
and never mutated.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .cube import (
    DENSE_MAX_N,
    MAX_DIM,
    RANDOM_DENSE_MAX_N,
    CapacityError,
    CubePoint,
    InvalidParameter,
    check_capacity,
)

MASS_TOL = 1e-12


def _check_prob(p, what: str) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise InvalidParameter(f"{what} must be a probability in [0, 1], got {p}")
    return p


def _check_dim(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_DIM:
        raise InvalidParameter(f"dimension must be an integer in [1, {MAX_DIM}], got {n!r}")
    return int(n)


def _bits_of(prefixes: np.ndarray, length: int, i: int) -> np.ndarray:
    """Coordinate i (1-based) of each prefix of the given length."""
    return (prefixes >> (length - i)) & 1


class CubeDistribution:
    """Common interface; subclasses fill in the generator formulas."""

    kind = "abstract"
    n: int

    # -- dense view -------------------------------------------------------

    def _materialize(self) -> np.ndarray:
        raise NotImplementedError

    def probs(self) -> np.ndarray:
        """Dense table of the 2^n masses (read-only)."""
        return self._dense

    @cached_property
    def _dense(self) -> np.ndarray:
        check_capacity(self.n, DENSE_MAX_N, f"dense table for {self.kind}")
        p = np.ascontiguousarray(self._materialize(), dtype=float)
        p.setflags(write=False)
        return p

    @cached_property
    def _tables(self) -> tuple:
        tables = [self.probs()]
        for _ in range(self.n):
            t = tables[-1]
            nxt = t[0::2] + t[1::2]
            nxt.setflags(write=False)
            tables.append(nxt)
        return tuple(reversed(tables))

    def prefix_tables(self) -> tuple:
        """``(mu_0, mu_1, ..., mu_n)``; ``mu_k`` has length 2^k and is obtained
        from ``mu_{k+1}`` by summing adjacent index pairs."""
        return self._tables

    # -- queries (dense defaults, overridden in closed form) ----------------

    @cached_property
    def _table_marginals(self) -> tuple:
        tables = self.prefix_tables()
        return tuple(float(tables[k][0::2].sum()) for k in range(1, self.n + 1))

    def marginal0(self, k: int) -> float:
        """mu^{(k)}(0), the probability that x_k = 0."""
        return self._table_marginals[k - 1]

    def prefix_mass(self, k: int, prefixes) -> np.ndarray:
        """mu_k evaluated at prefixes of length k (int64 array)."""
        prefixes = np.asarray(prefixes, dtype=np.int64)
        return self.prefix_tables()[k][prefixes]

    def conditional_p0(self, k: int, prefixes) -> tuple:
        """mu(x_k = 0 | prefix) for prefixes of length k-1.

        Returns ``(p0, defined)``; ``p0`` is NaN where the prefix has zero mass.
        """
        prefixes = np.asarray(prefixes, dtype=np.int64)
        base = self.prefix_mass(k - 1, prefixes)
        zero = self.prefix_mass(k, prefixes << 1)
        defined = base > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            p0 = np.where(defined, np.minimum(zero / np.where(defined, base, 1.0), 1.0), np.nan)
        return p0, defined

    @property
    def is_product(self) -> bool:
        return False

    def params(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"n": self.n, "kind": self.kind, "params": self.params()}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, params={self.params()!r})"


class DenseDistribution(CubeDistribution):
    kind = "dense"

    def __init__(self, probs):
        p = np.array(probs, dtype=float).ravel()
        size = p.size
        if size < 2 or size & (size - 1):
            raise InvalidParameter(f"dense table length must be 2^n with n >= 1, got {size}")
        self.n = size.bit_length() - 1
        check_capacity(self.n, DENSE_MAX_N, "dense backing")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidParameter("probabilities must be finite and nonnegative")
        total = p.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidParameter(f"total mass {total!r} differs from 1 by more than {MASS_TOL}")
        p.setflags(write=False)
        self._p = p

    def _materialize(self):
        return self._p

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        d = super().to_json()
        d["probs"] = [float(v) for v in self._p]
        return d


class ProductDistribution(CubeDistribution):
    kind = "product"

    def __init__(self, p0: Sequence[float]):
        self.n = _check_dim(len(p0))
        self.p0 = tuple(_check_prob(p, f"marginal {i + 1}") for i, p in enumerate(p0))
        self._p0 = np.array(self.p0)

    def _materialize(self):
        table = np.ones(1)
        for q in self.p0:
            table = np.kron(table, [q, 1.0 - q])
        return table

    def marginal0(self, k):
        return self.p0[k - 1]

    def prefix_mass(self, k, prefixes):
        prefixes = np.asarray(prefixes, dtype=np.int64)
        mass = np.ones(prefixes.shape)
        for i in range(1, k + 1):
            b = _bits_of(prefixes, k, i)
            mass = mass * np.where(b == 1, 1.0 - self._p0[i - 1], self._p0[i - 1])
        return mass

    def conditional_p0(self, k, prefixes):
        prefixes = np.asarray(prefixes, dtype=np.int64)
        defined = self.prefix_mass(k - 1, prefixes) > 0
        return np.where(defined, self.p0[k - 1], np.nan), defined

    @property
    def is_product(self):
        return True

    def params(self):
        return {"p0": list(self.p0)}


class MarkovDistribution(CubeDistribution):
    """x_1 ~ (initial_p0, 1 - initial_p0); row k gives (p(0|0), p(0|1)) for x_{k+1}."""

    kind = "markov"

    def __init__(self, initial_p0: float, transitions: Sequence[Sequence[float]]):
        self.initial_p0 = _check_prob(initial_p0, "initial_p0")
        rows = []
        for j, row in enumerate(transitions):
            if len(row) != 2:
                raise InvalidParameter(f"transition row {j} must be (p(0|0), p(0|1)), got {row!r}")
            rows.append((_check_prob(row[0], f"row {j} p(0|0)"), _check_prob(row[1], f"row {j} p(0|1)")))
        self.transitions = tuple(rows)
        self.n = _check_dim(len(rows) + 1)
        self._rows = np.array(rows).reshape(-1, 2)

    def _materialize(self):
        q = self.initial_p0
        table = np.array([q, 1.0 - q])
        for r00, r01 in self.transitions:
            last = np.arange(table.size) & 1
            stay0 = np.where(last == 0, r00, r01)
            nxt = np.empty(2 * table.size)
            nxt[0::2] = table * stay0
            nxt[1::2] = table * (1.0 - stay0)
            table = nxt
        return table

    @cached_property
    def _marginals(self):
        q = self.initial_p0
        out = [q]
        for r00, r01 in self.transitions:
            q = q * r00 + (1.0 - q) * r01
            out.append(q)
        return tuple(out)

    def marginal0(self, k):
        return self._marginals[k - 1]

    def prefix_mass(self, k, prefixes):
        prefixes = np.asarray(prefixes, dtype=np.int64)
        if k == 0:
            return np.ones(prefixes.shape)
        b = _bits_of(prefixes, k, 1)
        mass = np.where(b == 1, 1.0 - self.initial_p0, self.initial_p0)
        for i in range(2, k + 1):
            prev, b = b, _bits_of(prefixes, k, i)
            p0 = self._rows[i - 2][prev]
            mass = mass * np.where(b == 1, 1.0 - p0, p0)
        return mass

    def conditional_p0(self, k, prefixes):
        prefixes = np.asarray(prefixes, dtype=np.int64)
        defined = self.prefix_mass(k - 1, prefixes) > 0
        if k == 1:
            return np.where(defined, self.initial_p0, np.nan), defined
        p0 = self._rows[k - 2][prefixes & 1]
        return np.where(defined, p0, np.nan), defined

    def params(self):
        return {"initial_p0": self.initial_p0, "transitions": [list(r) for r in self.transitions]}


class DeltaMixDistribution(CubeDistribution):
    """(1/2 - eps) at 0...0, 1/2 at 1...1, eps spread evenly over the other 2^n - 2 points."""

    kind = "delta_mix"

    def __init__(self, n: int, eps: float):
        self.n = _check_dim(n)
        eps = float(eps)
        if not 0.0 <= eps < 0.5:
            raise InvalidParameter(f"eps must lie in [0, 1/2), got {eps}")
        if eps > 0 and self.n == 1:
            raise InvalidParameter("eps > 0 needs n >= 2: I_1 has no points besides 0 and 1")
        self.eps = eps

    @property
    def other_mass(self) -> float:
        """Mass of each point other than 0...0 and 1...1."""
        return self.eps / (2.0 ** self.n - 2.0) if self.eps > 0 else 0.0

    def _materialize(self):
        p = np.full(1 << self.n, self.other_mass)
        p[0] = 0.5 - self.eps
        p[-1] = 0.5
        return p

    def marginal0(self, k):
        if self.n == 1:
            return 0.5
        return 0.5 - self.eps + self.other_mass * (2.0 ** (self.n - 1) - 1.0)

    def prefix_mass(self, k, prefixes):
        prefixes = np.asarray(prefixes, dtype=np.int64)
        at0 = prefixes == 0
        at1 = prefixes == (1 << k) - 1
        completions = np.ldexp(1.0, self.n - k) - at0 - at1
        return (0.5 - self.eps) * at0 + 0.5 * at1 + self.other_mass * completions

    def params(self):
        return {"eps": self.eps}


# -- constructors -------------------------------------------------------------

def make_product(marginals: Sequence[float]) -> ProductDistribution:
    """Independent coordinates with P(x_k = 0) = marginals[k-1]."""
    return ProductDistribution(marginals)


def make_uniform(n: int) -> ProductDistribution:
    return ProductDistribution([0.5] * _check_dim(n))


def make_delta_mix(n: int, eps: float = 0.0) -> DeltaMixDistribution:
    return DeltaMixDistribution(n, eps)


def make_markov(initial_p0: float, transitions) -> MarkovDistribution:
    return MarkovDistribution(initial_p0, transitions)


def make_dense(probs) -> DenseDistribution:
    return DenseDistribution(probs)


def make_random_dense(n: int, seed) -> DenseDistribution:
    """Uniform draw from the probability simplex on I_n (normalized exponentials)."""
    n = _check_dim(n)
    check_capacity(n, RANDOM_DENSE_MAX_N, "make_random_dense")
    rng = np.random.default_rng(seed)
    w = rng.exponential(size=1 << n)
    return DenseDistribution(w / w.sum())


def make_random_markov(n: int, seed, initial_p0: Optional[float] = 0.5) -> MarkovDistribution:
    """Markov chain with uniformly random transition rows; a fixed initial law by default."""
    n = _check_dim(n)
    rng = np.random.default_rng(seed)
    if initial_p0 is None:
        initial_p0 = float(rng.uniform())
    rows = rng.uniform(size=(n - 1, 2))
    return MarkovDistribution(initial_p0, rows.tolist())


def make_random_product(n: int, seed) -> ProductDistribution:
    rng = np.random.default_rng(seed)
    return ProductDistribution(rng.uniform(size=_check_dim(n)).tolist())


def restrict(mu: CubeDistribution, k: int) -> DenseDistribution:
    """The joint law mu_k of the first k coordinates, as a dense distribution."""
    if not 1 <= k <= mu.n:
        raise InvalidParameter(f"prefix length {k} out of range for n={mu.n}")
    return DenseDistribution(mu.prefix_tables()[k])


# -- marginals, conditionals, epsilon -------------------------------------------

class Marginal(NamedTuple):
    p0: float
    p1: float


@dataclass(frozen=True)
class ConditionalRow:
    prefix: CubePoint
    p0: float
    p1: float
    defined: bool


@dataclass(frozen=True, eq=False)
class EpsilonTable:
    """eps_{x', b} = mu(x_k = b | x') - mu^{(k)}(b) for every prefix x' of length k-1.

    Only ``eps0`` is stored; ``eps_{x',1}`` is its exact negation. Entries for
    zero-mass prefixes are NaN and flagged in ``defined``.
    """

    k: int
    marginal0: float
    eps0: np.ndarray
    defined: np.ndarray
    weights: np.ndarray

    def values(self, bit: int) -> np.ndarray:
        return self.eps0 if bit == 0 else -self.eps0

    def entry(self, prefix: CubePoint, bit: int) -> float:
        if prefix.n != self.k - 1:
            raise InvalidParameter(f"prefix length {prefix.n} != {self.k - 1}")
        return float(self.values(bit)[prefix.index])

    def sup_norm(self) -> float:
        """max |eps| over positive-mass prefixes (identical for both bits)."""
        if not self.defined.any():
            return 0.0
        return float(np.max(np.abs(self.eps0[self.defined])))

    def weighted_mean(self, bit: int = 0) -> float:
        """E_{mu_{k-1}} eps_{x', bit}; zero by construction up to rounding."""
        v = np.where(self.defined, self.values(bit), 0.0)
        return float(np.dot(v, self.weights))


def _check_index(mu: CubeDistribution, k: int, lo: int) -> None:
    if not lo <= k <= mu.n:
        raise InvalidParameter(f"coordinate index {k} outside [{lo}, {mu.n}]")


def marginal(mu: CubeDistribution, k: int) -> Marginal:
    _check_index(mu, k, 1)
    p0 = mu.marginal0(k)
    return Marginal(p0, 1.0 - p0)


def conditional(mu: CubeDistribution, k: int, prefix) -> ConditionalRow:
    _check_index(mu, k, 2)
    if not isinstance(prefix, CubePoint):
        prefix = CubePoint.from_bits(prefix)
    if prefix.n != k - 1:
        raise InvalidParameter(f"prefix for coordinate {k} must have length {k - 1}, got {prefix.n}")
    p0, defined = mu.conditional_p0(k, np.array([prefix.index]))
    if not defined[0]:
        return ConditionalRow(prefix, float("nan"), float("nan"), False)
    return ConditionalRow(prefix, float(p0[0]), 1.0 - float(p0[0]), True)


def epsilon_table(mu: CubeDistribution, k: int) -> EpsilonTable:
    _check_index(mu, k, 2)
    cache = mu.__dict__.setdefault("_epsilon_tables", {})
    if k in cache:
        return cache[k]
    if k - 1 > 30:
        raise CapacityError(f"epsilon table over 2^{k - 1} prefixes is too large")
    prefixes = np.arange(1 << (k - 1), dtype=np.int64)
    p0, defined = mu.conditional_p0(k, prefixes)
    m0 = mu.marginal0(k)
    eps0 = np.where(defined, p0 - m0, np.nan)
    weights = mu.prefix_mass(k - 1, prefixes)
    for arr in (eps0, defined, weights):
        arr.setflags(write=False)
    table = cache[k] = EpsilonTable(k, m0, eps0, defined, weights)
    return table


# -- JSON ------------------------------------------------------------------------

def _dump(obj) -> str:
    # floats always carry 17 significant digits
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(mu: CubeDistribution) -> str:
    return _dump(mu.to_json())


def from_json(data: dict) -> CubeDistribution:
    try:
        n = int(data["n"])
        kind = data["kind"]
    except KeyError as exc:
        raise InvalidParameter(f"distribution JSON is missing {exc}") from None
    params = data.get("params") or {}
    if kind == "dense":
        mu = DenseDistribution(data["probs"])
    elif kind == "product":
        mu = ProductDistribution(params["p0"])
    elif kind == "markov":
        mu = MarkovDistribution(params["initial_p0"], params["transitions"])
    elif kind == "delta_mix":
        mu = DeltaMixDistribution(n, params.get("eps", 0.0))
    else:
        raise InvalidParameter(f"unknown distribution kind {kind!r}")
    if mu.n != n:
        raise InvalidParameter(f"declared n={n} but {kind} parameters give n={mu.n}")
    return mu


def loads(text: str) -> CubeDistribution:
    return from_json(json.loads(text))


def save(mu: CubeDistribution, path) -> None:
    Path(path).write_text(dumps(mu) + "\n")


def load(path) -> CubeDistribution:
    return loads(Path(path).read_text())
