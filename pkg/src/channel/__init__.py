"""Channel realizations, decomposition and link-level evaluators."""

from .realization import ChannelRealization, generate_channel, derive_seed
from .decomposition import SvdDecomposition, decompose, jacobi_eigh
from .link import (
    Covariance,
    received_rf_power,
    achievable_rate,
    eigen_rates,
    rate_from_matrix,
    received_power_from_matrix,
    dbm_to_watts,
)

__all__ = [
    "ChannelRealization",
    "generate_channel",
    "derive_seed",
    "SvdDecomposition",
    "decompose",
    "jacobi_eigh",
    "Covariance",
    "received_rf_power",
    "achievable_rate",
    "eigen_rates",
    "rate_from_matrix",
    "received_power_from_matrix",
    "dbm_to_watts",
]
