"""Concentration of x -> d_H(x, y) about its mean for arbitrary laws on I_n.

Everything here is exact enumeration over the dense table (n <= 24 by
default). The level-k quantities are evaluated on the 2^k prefix table
mu_k, so one pass over all levels costs O(2^n).

Notation used in names:

* ``prefix_mean(mu, y, k)``  = sum_{i<=k} mu^{(i)}(x_i != y_i)
* ``a_k(x')``                = exp(t (d_H(x', y') - prefix_mean(k))), x' in I_k
* ``correlation_integral``   = int a_{k-1} eps_{x', y_k} dmu_{k-1}
* ``E_k``                    = exp(-t mu^{(k+1)}(x != y_{k+1})) (1 - e^t)
                               * correlation_integral(k + 1)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cube import COUNT_MAX_N, CubePoint, InvalidParameter, as_point, check_capacity, hamming
from .dist import CubeDistribution, epsilon_table, marginal

__all__ = [
    "REL_TOL",
    "ZERO_BAND",
    "BoundReport",
    "CenteredMgf",
    "ErrorLedger",
    "CorrelationVerdict",
    "SmallVarianceBound",
    "CountReport",
    "hamming",
    "mean_hamming",
    "prefix_mean",
    "centered_mgf",
    "a_factor",
    "correlation_integral",
    "error_term",
    "error_terms",
    "inductive_bound",
    "correlation_verdict",
    "verdict_string",
    "pc_theorem_check",
    "count_good_y",
    "good_y_formula",
    "product_formula",
    "small_variance_b",
    "error_abs_bound",
    "small_variance_bound",
    "tail_bound",
    "hoeffding_mgf_bound",
    "hoeffding_tail",
]

REL_TOL = 1e-9
ZERO_BAND = 1e-12
TAIL_TOL = 1e-12


def _check_t(t: float) -> float:
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise InvalidParameter(f"t must be a finite positive real, got {t}")
    return t


def _popcount_xor(size: int, y_index: int) -> np.ndarray:
    return np.bitwise_count(np.arange(size, dtype=np.int64) ^ y_index).astype(float)


def rel_slack(lhs: float, bound: float) -> float:
    """(bound - lhs) / |bound|; nonnegative when the bound holds."""
    if math.isinf(bound) and bound > 0:
        return math.inf
    return (bound - lhs) / abs(bound) if bound != 0 else (0.0 if lhs <= 0 else -math.inf)


@dataclass(frozen=True)
class BoundReport:
    """One checked inequality ``lhs <= bound``.

    ``applicable`` is False when the hypotheses of the inequality are not met;
    such rows are recorded but never count as failures.
    """

    check: str
    y: CubePoint
    t: float
    lhs: float
    bound: float
    applicable: bool = True
    passed: bool = True
    note: str = ""

    @property
    def slack(self) -> float:
        return rel_slack(self.lhs, self.bound)

    @property
    def violated(self) -> bool:
        return self.applicable and not self.passed


def _report(check, y, t, lhs, bound, applicable=True, note="", extra_ok=True) -> BoundReport:
    passed = (not applicable) or (rel_slack(lhs, bound) >= -REL_TOL and extra_ok)
    return BoundReport(check, y, t, float(lhs), float(bound), applicable, passed, note)


# -- basic quantities ---------------------------------------------------------------

def prefix_mean(mu: CubeDistribution, y, k: int) -> float:
    """E_{mu_k} d_H(x', y') for the first k coordinates."""
    if not isinstance(y, CubePoint):
        y = CubePoint.from_bits(y)
    if not 0 <= k <= min(mu.n, y.n):
        raise InvalidParameter(f"prefix length {k} out of range")
    total = 0.0
    for i in range(1, k + 1):
        p0, p1 = marginal(mu, i)
        total += p1 if y.bit(i) == 0 else p0
    return total


def mean_hamming(mu: CubeDistribution, y) -> float:
    """E d_H(x, y) = sum_i mu^{(i)}(x_i != y_i)."""
    y = as_point(y, mu.n)
    return prefix_mean(mu, y, mu.n)


@dataclass(frozen=True)
class CenteredMgf:
    y: CubePoint
    t: float
    mean: float
    value: float
    enumerated_mean: float


def centered_mgf(mu: CubeDistribution, y, t: float) -> CenteredMgf:
    """E exp(t (d_H(x, y) - E d_H(x, y))) by enumeration of the dense table."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    p = mu.probs()
    d = _popcount_xor(p.size, y.index)
    mean = mean_hamming(mu, y)
    value = float(np.dot(p, np.exp(t * (d - mean))))
    return CenteredMgf(y, t, mean, value, float(np.dot(p, d)))


def hoeffding_mgf_bound(n: int, t: float) -> float:
    return math.exp(n * t * t / 2)


def hoeffding_tail(n: int, c: float) -> float:
    return 2.0 * math.exp(-c * c / (2.0 * n))


def _a_values(mu: CubeDistribution, y: CubePoint, k: int, t: float) -> np.ndarray:
    """a_k over all 2^k prefixes."""
    d = _popcount_xor(1 << k, y.prefix(k).index)
    return np.exp(t * (d - prefix_mean(mu, y, k)))


def a_factor(mu: CubeDistribution, k: int, x_prefix, y, t: float) -> float:
    """a_k(x', y', t) = exp(t (d_H(x', y') - E_{mu_k} d_H)) for one prefix x' of length k."""
    t = _check_t(t)
    if not isinstance(x_prefix, CubePoint):
        x_prefix = CubePoint.from_bits(x_prefix)
    if not 1 <= k <= mu.n or x_prefix.n != k:
        raise InvalidParameter(f"x_prefix must have length k={k} with 1 <= k <= {mu.n}")
    if not isinstance(y, CubePoint):
        y = CubePoint.from_bits(y)
    yk = y.prefix(k) if y.n > k else y
    if yk.n != k:
        raise InvalidParameter(f"y must have at least {k} coordinates")
    d = hamming(x_prefix, yk)
    return math.exp(t * (d - prefix_mean(mu, yk, k)))


# -- error terms and correlation ------------------------------------------------------

def correlation_integral(mu: CubeDistribution, y, k: int, t: float) -> float:
    """int a_{k-1}(x') eps_{x', y_k} dmu_{k-1}(x'), zero-mass prefixes excluded."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    if not 2 <= k <= mu.n:
        raise InvalidParameter(f"k must lie in [2, {mu.n}], got {k}")
    table = epsilon_table(mu, k)
    a = _a_values(mu, y, k - 1, t)
    eps = np.where(table.defined, table.values(y.bit(k)), 0.0)
    return float(np.sum(a * eps * table.weights))


def _prefactor(mu: CubeDistribution, y: CubePoint, j: int, t: float) -> float:
    """exp(-t mu^{(j)}(x_j != y_j))."""
    p0, p1 = marginal(mu, j)
    return math.exp(-t * (p1 if y.bit(j) == 0 else p0))


def error_term(mu: CubeDistribution, y, k: int, t: float) -> float:
    """E_k for 1 <= k <= n-1."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    if not 1 <= k <= mu.n - 1:
        raise InvalidParameter(f"k must lie in [1, {mu.n - 1}], got {k}")
    return _prefactor(mu, y, k + 1, t) * (-math.expm1(t)) * correlation_integral(mu, y, k + 1, t)


def error_terms(mu: CubeDistribution, y, t: float) -> list:
    """[E_1, ..., E_{n-1}]."""
    y = as_point(y, mu.n)
    return [error_term(mu, y, k, t) for k in range(1, mu.n)]


@dataclass(frozen=True)
class ErrorLedger:
    y: CubePoint
    t: float
    terms: tuple
    weighted_sum: float
    bound: float


def _ledger(mu, y, t, terms) -> ErrorLedger:
    n = mu.n
    h = t * t / 2
    weighted = sum(math.exp((n - k - 1) * h) * e for k, e in enumerate(terms, start=1))
    return ErrorLedger(y, t, tuple(terms), weighted, math.exp(n * h) + weighted)


def inductive_bound(mu: CubeDistribution, y, t: float) -> tuple:
    """exp(n t^2/2) + sum_k exp((n-k-1) t^2/2) E_k, checked against the exact MGF."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    ledger = _ledger(mu, y, t, error_terms(mu, y, t))
    mgf = centered_mgf(mu, y, t)
    return ledger, _report("inductive", y, t, mgf.value, ledger.bound)


@dataclass(frozen=True)
class CorrelationVerdict:
    k: int
    y_k_value: int
    integral: float
    verdict: str  # "positive" | "negative" | "zero"

    @property
    def symbol(self) -> str:
        return {"positive": "+", "negative": "-", "zero": "0"}[self.verdict]

    @property
    def satisfies_pc(self) -> bool:
        return self.verdict != "negative"


def correlation_verdict(mu: CubeDistribution, y, k: int, t: float) -> CorrelationVerdict:
    """Sign of the positive correlation condition for coordinate k (2 <= k <= n)."""
    y = as_point(y, mu.n)
    integral = correlation_integral(mu, y, k, t)
    if abs(integral) <= ZERO_BAND:
        verdict = "zero"
    else:
        verdict = "positive" if integral > 0 else "negative"
    return CorrelationVerdict(k, y.bit(k), integral, verdict)


def verdict_string(mu: CubeDistribution, y, t: float) -> str:
    """One of '+', '-', '0' per k = 2..n."""
    y = as_point(y, mu.n)
    return "".join(correlation_verdict(mu, y, k, t).symbol for k in range(2, mu.n + 1))


def pc_theorem_check(mu: CubeDistribution, y, t: float) -> BoundReport:
    """If every coordinate satisfies the positive correlation condition, the MGF
    obeys the independent-case bound exp(n t^2/2)."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    verdicts = verdict_string(mu, y, t)
    applicable = "-" not in verdicts
    mgf = centered_mgf(mu, y, t)
    return _report("pc", y, t, mgf.value, hoeffding_mgf_bound(mu.n, t), applicable, note=verdicts)


# -- counting of good y --------------------------------------------------------------

def good_y_formula(n: int) -> int:
    m = -(-(n - 1) // 2)  # ceil((n-1)/2)
    return 2 ** (n - m) * math.comb(n, m)


def _constant(values: Sequence[float], rtol: float = 1e-6) -> tuple:
    """(constant, degenerate): degenerate means every value is ~0."""
    if not values:
        return True, False
    hi, lo = max(values), min(values)
    if hi <= ZERO_BAND:
        return False, True
    return hi - lo <= rtol * hi, False


@dataclass(frozen=True)
class CountReport:
    count: int
    formula: int
    hypotheses_hold: bool
    hypotheses_hold_half: bool
    marginals_half: bool
    degenerate: bool
    good: tuple = field(repr=False)

    @property
    def formula_met(self) -> bool:
        return self.count >= self.formula


def count_good_y(mu: CubeDistribution, t: float) -> CountReport:
    """Count y with E exp(t(d_H - E d_H)) <= exp(n t^2/2) (1 + 1e-9) by enumeration.

    The hypothesis "exp((n-k-1) t^2) |E_k| is constant in k" is evaluated per y,
    once with the weight as written (t^2) and once with the weight of the
    error sum (t^2/2); ``hypotheses_hold`` / ``hypotheses_hold_half`` require the
    marginal condition and constancy at every y. All-zero E_k is reported as
    ``degenerate`` and does not count as constancy.
    """
    t = _check_t(t)
    n = mu.n
    check_capacity(n, COUNT_MAX_N, "count_good_y")
    bound = hoeffding_mgf_bound(n, t) * (1 + REL_TOL)
    marginals_half = all(abs(marginal(mu, i).p0 - 0.5) <= 1e-9 for i in range(1, n + 1))
    good = []
    const_full = const_half = True
    degenerate = False
    for idx in range(1 << n):
        y = CubePoint(n, idx)
        if centered_mgf(mu, y, t).value <= bound:
            good.append(idx)
        terms = [abs(e) for e in error_terms(mu, y, t)]
        full = [math.exp((n - k - 1) * t * t) * e for k, e in enumerate(terms, start=1)]
        half = [math.exp((n - k - 1) * t * t / 2) * e for k, e in enumerate(terms, start=1)]
        ok_full, deg = _constant(full)
        ok_half, _ = _constant(half)
        const_full &= ok_full
        const_half &= ok_half
        degenerate |= deg
    return CountReport(
        count=len(good),
        formula=good_y_formula(n),
        hypotheses_hold=marginals_half and const_full,
        hypotheses_hold_half=marginals_half and const_half,
        marginals_half=marginals_half,
        degenerate=degenerate,
        good=tuple(good),
    )


# -- small-variance bound -------------------------------------------------------------

class ProductFormula(NamedTuple):
    lhs: float
    rhs: float


def product_formula(b: Sequence[float], t: float, n: int) -> ProductFormula:
    """Both sides of the telescoping identity for b = (b_2, ..., b_n).

    lhs = prod_{j=2..n} (b_j + e^{t^2/2})
    rhs = e^{(n-1)t^2/2} + e^{(n-2)t^2/2} b_2
          + sum_{k=2..n-1} e^{(n-k-1)t^2/2} b_{k+1} prod_{j=2..k} (b_j + e^{t^2/2})
    """
    b = [float(v) for v in b]
    if n < 2 or len(b) != n - 1:
        raise InvalidParameter(f"need n >= 2 and n-1 = {n - 1} values b_2..b_n, got {len(b)}")
    h = t * t / 2
    g = math.exp(h)
    bj = dict(zip(range(2, n + 1), b))
    lhs = math.prod(bj[j] + g for j in range(2, n + 1))
    rhs = math.exp((n - 1) * h) + math.exp((n - 2) * h) * bj[2]
    for k in range(2, n):
        rhs += math.exp((n - k - 1) * h) * bj[k + 1] * math.prod(bj[j] + g for j in range(2, k + 1))
    return ProductFormula(lhs, rhs)


def small_variance_b(mu: CubeDistribution, y, t: float) -> list:
    """[b_2, ..., b_n] with b_j = exp(-t mu^{(j)}(x_j != y_j)) (e^t - 1) ||eps_{., y_j}||_inf."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    return [_prefactor(mu, y, j, t) * math.expm1(t) * epsilon_table(mu, j).sup_norm()
            for j in range(2, mu.n + 1)]


class ErrorAbsBound(NamedTuple):
    abs_ek: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.abs_ek <= self.bound + REL_TOL


def _abs_bound(b: Sequence[float], k: int, g: float) -> float:
    # b[0] is b_2
    return b[k - 1] * g * math.prod(b[j - 2] + g for j in range(2, k + 1))


def error_abs_bound(mu: CubeDistribution, y, k: int, t: float) -> ErrorAbsBound:
    """|E_k| against b_{k+1} e^{t^2/2} prod_{j=2..k} (b_j + e^{t^2/2})."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    e = error_term(mu, y, k, t)
    b = small_variance_b(mu, y, t)
    return ErrorAbsBound(abs(e), _abs_bound(b, k, math.exp(t * t / 2)))


@dataclass(frozen=True)
class SmallVarianceBound:
    y: CubePoint
    t: float
    b: tuple
    value: float
    middle: float  # exp(n t^2/2) + sum_k exp((n-k-1) t^2/2) |E_k|


def small_variance_bound(mu: CubeDistribution, y, t: float) -> tuple:
    """exp(t^2/2) prod_{j=2..n} (b_j + exp(t^2/2)), with the intermediate
    absolute-error sum checked as a separate link of the chain."""
    t = _check_t(t)
    y = as_point(y, mu.n)
    n = mu.n
    h = t * t / 2
    g = math.exp(h)
    b = small_variance_b(mu, y, t)
    value = g * math.prod(bj + g for bj in b)
    terms = error_terms(mu, y, t)
    middle = math.exp(n * h) + sum(math.exp((n - k - 1) * h) * abs(e) for k, e in enumerate(terms, start=1))
    sv = SmallVarianceBound(y, t, tuple(b), value, middle)
    lhs = centered_mgf(mu, y, t).value
    links = rel_slack(lhs, middle) >= -REL_TOL and rel_slack(middle, value) >= -REL_TOL
    return sv, _report("smallvar", y, t, lhs, value, extra_ok=links)


# -- tails ---------------------------------------------------------------------------

class TailBound(NamedTuple):
    exact_tail: float
    hoeffding_tail: float

    @property
    def holds(self) -> bool:
        return self.exact_tail <= self.hoeffding_tail * (1 + REL_TOL)


def tail_bound(mu: CubeDistribution, y, c: float) -> TailBound:
    """Exact mu{|d_H - E d_H| >= c} next to the independent-case bound 2 exp(-c^2/2n).

    Deviations within 1e-12 of c count as reaching c.
    """
    c = float(c)
    if not c > 0:
        raise InvalidParameter(f"c must be positive, got {c}")
    y = as_point(y, mu.n)
    p = mu.probs()
    d = _popcount_xor(p.size, y.index)
    mean = mean_hamming(mu, y)
    exact = float(p[np.abs(d - mean) >= c - TAIL_TOL].sum())
    return TailBound(exact, hoeffding_tail(mu.n, c))
