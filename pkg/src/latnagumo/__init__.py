"""Stochastic nonlocal lattice Nagumo equation: simulation and verification."""

from .certify import CertificationReport, check_coercivity, check_monotonicity
from .errors import (
    BlowUpError,
    ContractError,
    CutoffWarning,
    DegenerateStencilError,
    DimensionError,
    InsufficientDataError,
    NoCrossingError,
)
from .front import (
    FrontProfile,
    analytic_speed,
    front_initial_data,
    profile_eval,
    tail_mass,
    tw_residual,
)
from .grid import (
    BoundaryCondition,
    GridSpec,
    LatticeState,
    discrete_l2_norm_sq,
    extend,
    l2_distance_sq,
    sample_function,
)
from .integrator import (
    IntegratorConfig,
    Scheme,
    TrajectoryRecord,
    deterministic_solve,
    em_step,
    energy_residual,
    integrate,
    semi_implicit_step,
    stability_max_dt,
)
from .montecarlo import McEstimate, mc_probability, sup_deviation, wilson_interval
from .noise import NoiseMode, NoiseSpec, RngStream, g_eval, trace_q, wiener_increment
from .reaction import ReactionParams, c_a_const, f_eval
from .runspec import RunSetup
from .stencil import (
    StencilWeights,
    ValidationReport,
    apply_laplacian,
    dirichlet_form,
    gaussian_weights,
    nearest_neighbor,
    normalize_second_moment,
    operator_matrix,
    validate_weights,
)
from .studies import convergence_study, cutoff_study, small_noise_study
from .tracking import SpeedFit, estimate_speed, fit_shift, front_position

__version__ = "0.1.0"
