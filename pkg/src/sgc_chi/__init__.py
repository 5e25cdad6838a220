"""Lambda-atom steady states and SGC-induced susceptibilities."""

from .core import (
    DensityMatrix,
    SystemParams,
    ValidationResult,
    cross_decay_matrix,
    effective_rabi,
    validate_params,
)
from .errors import (
    ConfigError,
    DomainError,
    ExtractionUnreliable,
    IntegrationError,
    InvalidParameters,
    NonUniqueSteadyState,
    SGCError,
    SingularityError,
)
from .liouvillian import (
    LiouvillianMatrix,
    Trajectory,
    build_liouvillian,
    equations_of_motion,
    evolve,
    steady_state,
)
from .perturbation import (
    PerturbativeCoefficients,
    analytic_coefficients,
    extract_orders,
    rho11_second,
    rho13_first,
    rho13_second,
    rho23_second,
)
from .susceptibility import SusceptibilityPoint, chi1, chi2, consistency_report
from .sweep import DeltaGrid, SweepConfig, SweepRow, SweepTable, run_sweep, write_output

__version__ = "0.1.0"
