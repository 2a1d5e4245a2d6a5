"""Entropy models: factorized hyper-prior, Gaussian conditional, hyperprior and CHARM."""

from .charm import (
    CharmEntropyModel,
    HyperSplit,
    SliceContext,
    charm_slice_params,
    merge_lrp,
    split_hyper_features,
)
from .factorized import DeepFactorizedPrior, factorized_bits
from .gaussian import P_MIN, SCALE_FLOOR, EntropyParams, gaussian_bits, gaussian_likelihood
from .hyperprior import hyperprior_params, params_from_support

__all__ = [
    "CharmEntropyModel",
    "DeepFactorizedPrior",
    "EntropyParams",
    "HyperSplit",
    "P_MIN",
    "SCALE_FLOOR",
    "SliceContext",
    "charm_slice_params",
    "factorized_bits",
    "gaussian_bits",
    "gaussian_likelihood",
    "hyperprior_params",
    "merge_lrp",
    "params_from_support",
    "split_hyper_features",
]
