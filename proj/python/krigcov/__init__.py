"""Kernel-based kriging cloud-factor forecasting with dissimilarity-driven
persistent coverage control for mobile sensor agents."""

from ._core import (
    CoverageParams,
    KernelParams,
    MissionGrid,
    RunLog,
    SampleBuffer,
    SpatioTemporalPoint,
    __version__,
    cross_kernel,
    dissimilarity_general,
    dissimilarity_map,
    gram,
    kernel,
    lloyd_placement,
    measurement,
    penalty,
    penalty_deriv,
    predict,
    run_scenario,
    solve_weights,
    synth_cloud_field,
    tune,
)

__all__ = [
    "CoverageParams",
    "KernelParams",
    "MissionGrid",
    "RunLog",
    "SampleBuffer",
    "SpatioTemporalPoint",
    "__version__",
    "cross_kernel",
    "dissimilarity_general",
    "dissimilarity_map",
    "gram",
    "kernel",
    "lloyd_placement",
    "measurement",
    "penalty",
    "penalty_deriv",
    "predict",
    "run_scenario",
    "solve_weights",
    "synth_cloud_field",
    "tune",
]
