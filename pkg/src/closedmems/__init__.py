"""Finite-difference toolkit for the closed-MEMS equation ``-Δu = λ/(a-u)^p``.

The ground plate ``a`` vanishes on the boundary like ``ρ^γ``.  The package
computes minimal solutions by monotone iteration, brackets the pull-in
voltage, certifies stability through the linearized eigenvalue, fits boundary
decay rates and classifies the (γ, p, N) parameter regimes in closed form.
"""
from .analysis import (
    DecayFit,
    ExtremalProbe,
    ExtremalRecord,
    PullInError,
    PullInResult,
    StabilityReport,
    SweepRecord,
    extremal_probe,
    find_pullin,
    fit_boundary_decay,
    lambda_hash,
    lambda_p0_limit,
    lambda_sub_star,
    lambda_upper_bound,
    linearized_weight,
    stability,
    sweep_lambda,
)
from .cli_io import ConfigError, CsvTable, RunConfig, parse_config
from .core import (
    BoundReport,
    MinimalSolveResult,
    MonotonicityError,
    Profile,
    ProfileError,
    ProfileShape,
    SolveOptions,
    SolveStatus,
    check_minimal_bounds,
    make_profile,
    residual_norm,
    solve_minimal,
)
from .geometry import (
    Domain,
    DomainKind,
    Grid,
    boundary_distance,
    build_grid,
    varrho_from_rho,
    varrho_tau,
)
from .operators import (
    EigenResult,
    LaplaceOperator,
    MMatrixError,
    SolverError,
    assemble,
    green_apply,
    green_apply_transpose,
    smallest_eigenvalue,
)
from .regimes import (
    ExtremalRegularity,
    Regime,
    RegimeReport,
    classify,
    f0,
    holder_alpha,
    in_I_gamma,
    p_sharp,
    p_star,
    q_sharp,
)

__version__ = "0.1.0"
