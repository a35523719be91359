"""Forward solvers: transient equation, principal eigenpair, balance checks."""

from divrate.forward.solver import (
    BlowUp,
    CflViolation,
    DegenerateInput,
    ForwardError,
    NonConverged,
    SolverConfig,
    Trajectory,
    apply_generator,
    balance_residuals,
    convergence_distances,
    default_initial_profile,
    eigenpair_solve,
    transient_solve,
)


__all__ = [
    "BlowUp",
    "CflViolation",
    "DegenerateInput",
    "ForwardError",
    "NonConverged",
    "SolverConfig",
    "Trajectory",
    "apply_generator",
    "balance_residuals",
    "convergence_distances",
    "default_initial_profile",
    "eigenpair_solve",
    "transient_solve",
]
