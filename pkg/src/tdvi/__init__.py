"""Variational integrators for time-dependent Lagrangian systems."""

from .errors import (
    DegenerateLagrangian,
    EvaluationError,
    NewtonDivergence,
    NonMonotoneTime,
    ParseError,
    SingularJacobian,
    UnknownProblem,
    ValidationError,
    VariationalError,
    ZeroTimeStep,
)
from .lagrangian import (
    ExtendedPoint,
    LagrangianModel,
    continuous_energy,
    eval_lagrangian,
    partials,
    reference_solve,
)
from .discretization import (
    DiscreteLagrangian,
    SegmentState,
    action_sum,
    barD12_matrix,
    discrete_energy,
    grad_blocks,
    midpoint_discretize,
)
from .stepper import (
    AutonomousLagrangian,
    SolverConfig,
    StepStats,
    Window,
    del_residual,
    energy_form_residual,
    initialize,
    kmo_step,
    step_adaptive,
    step_fixed,
)
from .diagnostics import (
    SymmetryGenerator,
    boundary_energies,
    flow_jacobian,
    invariance_defect,
    momentum_map,
    omega_matrix,
    symplecticity_defect,
    theta_minus,
    theta_plus,
)
from .problems import ProblemSpec, builtin, paper_example_residual, problem_names
from .trajectory import Trajectory, convergence_order, convergence_study, run_trajectory

__all__ = [
    "DegenerateLagrangian",
    "EvaluationError",
    "NewtonDivergence",
    "NonMonotoneTime",
    "ParseError",
    "SingularJacobian",
    "UnknownProblem",
    "ValidationError",
    "VariationalError",
    "ZeroTimeStep",
    "ExtendedPoint",
    "LagrangianModel",
    "continuous_energy",
    "eval_lagrangian",
    "partials",
    "reference_solve",
    "DiscreteLagrangian",
    "SegmentState",
    "action_sum",
    "barD12_matrix",
    "discrete_energy",
    "grad_blocks",
    "midpoint_discretize",
    "AutonomousLagrangian",
    "SolverConfig",
    "StepStats",
    "Window",
    "del_residual",
    "energy_form_residual",
    "initialize",
    "kmo_step",
    "step_adaptive",
    "step_fixed",
    "SymmetryGenerator",
    "boundary_energies",
    "flow_jacobian",
    "invariance_defect",
    "momentum_map",
    "omega_matrix",
    "symplecticity_defect",
    "theta_minus",
    "theta_plus",
    "ProblemSpec",
    "builtin",
    "paper_example_residual",
    "problem_names",
    "Trajectory",
    "convergence_order",
    "convergence_study",
    "run_trajectory",
]

__version__ = "0.1.0"
