"""Numerical laboratory for bounded-confidence opinion dynamics with
distributed time delay: N-agent integration, consensus certificates with a
constructive decay rate, and empirical-measure mean-field experiments."""

__version__ = "0.1.0"

from .backend import backend_name
from .diagnostics import (
    ConsensusCertificate,
    DecayFit,
    DiagnosticsSeries,
    ball_check,
    certify,
    diagnostics_series,
    diameter,
    dini_check,
    fit_decay_rate,
    gamma,
    initial_radius,
    lyapunov,
    lyapunov_decay_check,
    speed_check,
)
from .dynamics import (
    SCHEMES,
    ModelConfig,
    Trajectory,
    comm_weight,
    rhs,
    simulate,
    step,
)
from .errors import (
    AccuracyError,
    CoverageError,
    DomainError,
    InternalInconsistency,
    NumericFailure,
    OrderingError,
    QuadratureError,
    SizeError,
    ValidationError,
)
from .history import HistoryBuffer, InitialHistory
from .kernels import (
    DelayProfile,
    InfluenceKernel,
    MemoryWeight,
    a_bar,
    adaptive_quadrature,
    h_of_t,
    psi_eval,
)
from .meanfield import (
    ConvergenceReport,
    EmpiricalMeasure,
    InitialMeasureSpec,
    convergence_experiment,
    measure_at,
    sample_atoms,
    sample_particles,
    support_diameter,
    wasserstein1_1d,
    wasserstein1_assignment,
)
from .scenario import Scenario, build_scenario, load_scenario, with_seed

__all__ = [
    "AccuracyError",
    "ConsensusCertificate",
    "ConvergenceReport",
    "CoverageError",
    "DecayFit",
    "DelayProfile",
    "DiagnosticsSeries",
    "DomainError",
    "EmpiricalMeasure",
    "HistoryBuffer",
    "InfluenceKernel",
    "InitialHistory",
    "InitialMeasureSpec",
    "InternalInconsistency",
    "MemoryWeight",
    "ModelConfig",
    "NumericFailure",
    "OrderingError",
    "QuadratureError",
    "SCHEMES",
    "Scenario",
    "SizeError",
    "Trajectory",
    "ValidationError",
    "a_bar",
    "adaptive_quadrature",
    "backend_name",
    "ball_check",
    "build_scenario",
    "certify",
    "comm_weight",
    "convergence_experiment",
    "diagnostics_series",
    "diameter",
    "dini_check",
    "fit_decay_rate",
    "gamma",
    "h_of_t",
    "initial_radius",
    "load_scenario",
    "lyapunov",
    "lyapunov_decay_check",
    "measure_at",
    "psi_eval",
    "rhs",
    "sample_atoms",
    "sample_particles",
    "simulate",
    "speed_check",
    "step",
    "support_diameter",
    "wasserstein1_1d",
    "wasserstein1_assignment",
    "with_seed",
]
