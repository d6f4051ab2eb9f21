"""Sequential sampling through the conditional laws, plus Hoeffding-calibrated estimates.

x_1 is drawn from its marginal, then x_k from mu(x_k | x_1, ..., x_{k-1}).
Generator backings answer those conditionals in closed form, so sampling
works for any n <= 62 without a dense table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube import InvalidParameter, as_point
from .dist import (
    CubeDistribution,
    DeltaMixDistribution,
    DenseDistribution,
    MarkovDistribution,
    ProductDistribution,
)
from .hamming import TAIL_TOL, _check_t, mean_hamming

RNG_NAME = "numpy.PCG64"
SAMPLE_MAX_N = 62
SUPPORTED = (DenseDistribution, ProductDistribution, MarkovDistribution, DeltaMixDistribution)


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample(mu: CubeDistribution, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` points of I_n as int64 indices."""
    if not isinstance(mu, SUPPORTED):
        raise InvalidParameter(f"unsupported backing {type(mu).__name__}")
    if mu.n > SAMPLE_MAX_N:
        raise InvalidParameter(f"sampling supports n <= {SAMPLE_MAX_N}")
    x = np.zeros(size, dtype=np.int64)
    for k in range(1, mu.n + 1):
        if k == 1:
            p0 = np.full(size, mu.marginal0(1))
        else:
            p0, _ = mu.conditional_p0(k, x)
        bit = (rng.random(size) >= p0).astype(np.int64)
        x = (x << 1) | bit
    return x


def hoeffding_radius(samples: int, delta: float, width: float = 1.0) -> float:
    """Two-sided radius for a mean of ``samples`` summands in an interval of ``width``."""
    return width * math.sqrt(math.log(2.0 / delta) / (2.0 * samples))


@dataclass(frozen=True)
class MonteCarloEstimate:
    samples: int
    estimate: float
    radius: float
    delta: float
    quantity: str = "tail"

    def covers(self, exact: float) -> bool:
        return abs(self.estimate - exact) <= self.radius


def _validate(samples: int, delta: float) -> None:
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    if not 0 < delta < 1:
        raise InvalidParameter("delta must lie in (0, 1)")


def _distances(mu, y, samples, seed):
    x = sample(mu, samples, make_rng(seed))
    return np.bitwise_count(x ^ y.index).astype(float)


def mc_estimate_tail(mu: CubeDistribution, y, c: float, samples: int, seed, delta: float = 0.01) -> MonteCarloEstimate:
    """Estimate mu{|d_H(x, y) - E d_H| >= c}; the mean is the exact marginal sum."""
    _validate(samples, delta)
    y = as_point(y, mu.n)
    mean = mean_hamming(mu, y)
    d = _distances(mu, y, samples, seed)
    est = float(np.mean(np.abs(d - mean) >= c - TAIL_TOL))
    return MonteCarloEstimate(samples, est, hoeffding_radius(samples, delta), delta, "tail")


def mc_estimate_mgf(mu: CubeDistribution, y, t: float, samples: int, seed, delta: float = 0.01) -> MonteCarloEstimate:
    """Estimate E exp(t (d_H - E d_H)); summands lie in [e^{-t m}, e^{t (n - m)}]."""
    _validate(samples, delta)
    t = _check_t(t)
    y = as_point(y, mu.n)
    mean = mean_hamming(mu, y)
    d = _distances(mu, y, samples, seed)
    width = math.exp(t * (mu.n - mean)) - math.exp(-t * mean)
    est = float(np.mean(np.exp(t * (d - mean))))
    return MonteCarloEstimate(samples, est, hoeffding_radius(samples, delta, width), delta, "mgf")
