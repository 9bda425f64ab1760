"""Quantum-equilibrium ensembles: samplers, accumulation kernels, estimators."""

from .engine import Accumulation, HistogramSpec
from .estimators import (
    AngleStatistics,
    CorrelationTensor,
    Ensemble,
    EstimatorResult,
    Histogram1D,
    angle_statistics,
    correlation_tensor,
    estimate_average,
    estimate_density,
)
from .sampling import GridSpec, LatticeSpec, McSpec, SampleBatch

__all__ = [
    "Accumulation", "AngleStatistics", "CorrelationTensor", "Ensemble", "EstimatorResult",
    "GridSpec", "Histogram1D", "HistogramSpec", "LatticeSpec", "McSpec", "SampleBatch",
    "angle_statistics", "correlation_tensor", "estimate_average", "estimate_density",
]
