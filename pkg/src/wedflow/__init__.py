"""Variational space-time solver for semilinear gradient flows.

Minimizes exponentially weighted energy-dissipation functionals over
discrete trajectories, solves the associated stationarity systems, and
verifies the vanishing-relaxation limit against an independent causal
time-stepping solver.
"""

from .errors import (
    ConfigurationError,
    EvaluationError,
    NumericalError,
    WedflowError,
)
from .experiments import (
    AssumptionReport,
    SweepRow,
    SweepTable,
    causal_sweep,
    energy_slack,
    lambda_sweep,
    traj_l2h_distance,
    verify_assumptions,
)
from .functional import (
    ElResidual,
    WedBreakdown,
    WedConfig,
    chain_rule_check,
    el_residual,
    wed_gradient,
    wed_penalized_value,
    wed_value,
)
from .models import (
    delta_kernel,
    gaussian_kernel,
    heat_instance,
    kirchhoff_instance,
    make_dissipation,
    make_kernel,
    make_potential,
    make_u0,
)
from .optimize import OptimizeConfig, SolveReport, continuation_minimize, minimize
from .problem import (
    ConvexPotential,
    DissipationModel,
    ProblemInstance,
    SpatialGrid,
    Trajectory,
    apply_A,
    constant_trajectory,
    convolve,
    d1_psi,
    d2_psi,
    d21_psi_apply,
    d22_psi_apply,
    eval_beta,
    phi1,
    phi2,
    psi,
    reflect_kernel,
    sine_mode,
    stencil_eigenvalue,
)
from .reference import StepperConfig, solve_flow, step
from .regularize import (
    d_phi2_lambda,
    phi1_lambda,
    phi2_lambda,
    resolve_A,
    resolve_beta,
    resolve_phi2,
    yosida_A,
)

__version__ = "0.1.0"
