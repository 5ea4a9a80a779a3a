"""Anchorless relative kinematics from time-varying pairwise distances.

Estimates the relative position, velocity and acceleration of a network
of mobile nodes from noisy pairwise-distance sequences, optionally fused
with accelerometer readings, and ships a simulator plus a Monte-Carlo
benchmarking harness.
"""

from .accel_estimator import (
    AccelCoefficients,
    deflate_grams,
    estimate_with_accel,
    fit_accel_coeffs,
    fit_deflated_coeffs,
)
from .distance_estimator import (
    BasisSystem,
    ChuFactors,
    GrammianCoefficients,
    KinematicEstimate,
    build_and_solve_basis,
    chu_decompose,
    estimate_from_distances,
    fit_gram_coeffs,
    recover_position_acceleration,
    recover_velocity,
)
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DegenerateGeometryWarning,
    DegenerateRotationError,
    EstimationError,
    InvalidDimensionError,
    NonUniqueSolutionError,
    RelkinError,
    SingularDesignError,
    UnsupportedOrderError,
)
from .harness import (
    MonteCarloResult,
    RmseEntry,
    RmseTable,
    TimeSweepEntry,
    TrialResult,
    align_to_truth,
    rmse,
    run_monte_carlo,
)
from .linalg import (
    MdsResult,
    centering_matrix,
    classical_mds,
    edm_from_points,
    gram_from_edm,
    orthogonal_procrustes,
    unvech,
    vech,
)
from .trajectory import (
    MeasurementSet,
    PolynomialTrajectory,
    SimConfig,
    benchmark_trajectory,
    center_coefficients,
    eval_kinematics,
    rotation2d,
    simulate_measurements,
)

__version__ = "0.1.0"

__all__ = [
    "AccelCoefficients",
    "BasisSystem",
    "ChuFactors",
    "ConfigError",
    "DegenerateGeometryError",
    "DegenerateGeometryWarning",
    "DegenerateRotationError",
    "EstimationError",
    "GrammianCoefficients",
    "InvalidDimensionError",
    "KinematicEstimate",
    "MdsResult",
    "MeasurementSet",
    "MonteCarloResult",
    "NonUniqueSolutionError",
    "PolynomialTrajectory",
    "RelkinError",
    "RmseEntry",
    "RmseTable",
    "SimConfig",
    "SingularDesignError",
    "TimeSweepEntry",
    "TrialResult",
    "UnsupportedOrderError",
    "align_to_truth",
    "benchmark_trajectory",
    "build_and_solve_basis",
    "center_coefficients",
    "centering_matrix",
    "chu_decompose",
    "classical_mds",
    "deflate_grams",
    "edm_from_points",
    "estimate_from_distances",
    "estimate_with_accel",
    "eval_kinematics",
    "fit_accel_coeffs",
    "fit_deflated_coeffs",
    "fit_gram_coeffs",
    "gram_from_edm",
    "orthogonal_procrustes",
    "recover_position_acceleration",
    "recover_velocity",
    "rmse",
    "rotation2d",
    "run_monte_carlo",
    "simulate_measurements",
    "unvech",
    "vech",
]
