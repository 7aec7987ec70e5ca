"""Minimization of approximately submodular set functions H = F - G."""

from .core import (
    Decomposition,
    DrParameters,
    GroundSet,
    Subset,
    ValueOracle,
    brute_force_min,
    complement_oracle,
    estimate_dr_parameters,
    marginal_gain,
    modular_oracle,
    table_oracle,
)
from .errors import WdrError
from .kernels import BACKEND
from .lovasz import greedy_subgradient, lovasz_value, order_coordinates, round_by_superlevel
from .pgm import PgmConfig, PgmResult, certificate_bound, minimize, minimize_nonincreasing

__version__ = "0.1.0"
