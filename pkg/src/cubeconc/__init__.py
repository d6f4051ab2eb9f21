"""Exact concentration checks for dependent distributions on the Boolean cube."""
from .cube import CapacityError, CubePoint, InvalidParameter, NotApplicable
from .dist import (
    CubeDistribution,
    conditional,
    epsilon_table,
    make_delta_mix,
    make_dense,
    make_markov,
    make_product,
    make_random_dense,
    make_uniform,
    marginal,
)

__version__ = "0.1.0"
