"""Extremal coefficient functions of max-stable processes as computable objects."""

__version__ = "0.1.0"

from .ecf import (
    DiscreteSpectralMeasure,
    EcfTable,
    InvalidEcfError,
    NormalizationError,
    TauTable,
    compute_tau,
    ecf_from_spectral_measure,
    ecf_from_tau,
    marginalize_tau,
    random_valid_ecf,
    validate_ecf,
)
from .kernels import BACKEND
from .semigroup import GroundSet, SetFunction
from .tm import TmProcess, simulate_maxlinear, simulate_tm, tm_from_ecf

__all__ = [
    "BACKEND",
    "DiscreteSpectralMeasure",
    "EcfTable",
    "GroundSet",
    "InvalidEcfError",
    "NormalizationError",
    "SetFunction",
    "TauTable",
    "TmProcess",
    "compute_tau",
    "ecf_from_spectral_measure",
    "ecf_from_tau",
    "marginalize_tau",
    "random_valid_ecf",
    "simulate_maxlinear",
    "simulate_tm",
    "tm_from_ecf",
    "validate_ecf",
]
