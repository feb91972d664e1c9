"""Pull-in voltage, stability of minimal solutions and boundary/extremal probes."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    MinimalSolveResult,
    Profile,
    SolveOptions,
    SolveStatus,
    solve_minimal,
)
from .geometry import Grid, ScalarField, boundary_distance
from .operators import (
    EigenResult,
    LaplaceOperator,
    green_apply,
    green_apply_transpose,
    smallest_eigenvalue,
)
from .regimes import f0, in_I_gamma

__all__ = [
    "PullInError",
    "PullInResult",
    "StabilityReport",
    "SweepRecord",
    "DecayFit",
    "ExtremalProbe",
    "ExtremalRecord",
    "lambda_upper_bound",
    "lambda_p0_limit",
    "green_constant",
    "lambda_hash",
    "find_pullin",
    "stability",
    "sweep_lambda",
    "fit_boundary_decay",
    "extremal_probe",
    "lambda_sub_star",
]


class PullInError(RuntimeError):
    """The bisection bracket could not be set up."""


def lambda_upper_bound(op: LaplaceOperator, prof: Profile, p: float) -> float:
    """Integral bound ``∫a / ∫ G[1] a^{-p}`` on the pull-in voltage.

    Uses the nodal-sum quadrature.  On the disk the adjoint solve
    ``A^{-T} 1`` replaces ``G[1]`` so that the bound stays exact for the
    nonsymmetric discrete operator.

    Raises
    ------
    ValueError
        If ``p >= 2/γ``; the continuum integrand is then not integrable.
    """
    if not 0 < p < 2.0 / prof.gamma:
        raise ValueError(
            f"p = {p!r} is outside (0, 2/gamma) = (0, {2.0 / prof.gamma!r}): "
            "G[1] a^-p is not integrable there, the integral bound does not exist"
        )
    g1 = green_apply_transpose(op, np.ones(op.size))
    return float(np.sum(prof.a) / np.sum(g1 * prof.a ** (-p)))


def lambda_p0_limit(op: LaplaceOperator, prof: Profile) -> float:
    """``∫a / ∫G[1]``, the ``p -> 0`` limit of :func:`lambda_upper_bound`."""
    g1 = green_apply_transpose(op, np.ones(op.size))
    return float(np.sum(prof.a) / np.sum(g1))


def green_constant(op: LaplaceOperator, prof: Profile, p: float) -> float:
    """``c4 = max G[ρ^{-pγ}] / ρ^γ`` over the interior nodes."""
    rho = prof.rho
    return float(np.max(green_apply(op, rho ** (-p * prof.gamma)) / rho ** prof.gamma))


def lambda_hash(op: LaplaceOperator, prof: Profile, p: float) -> float:
    """Guaranteed-solvable voltage ``p^p (κ^{-1}/(p+1))^{p+1} / c4``.

    At this voltage every iterate satisfies ``v_n <= μ* ρ^γ`` with
    ``μ* = κ^{-1}/(p+1)``, so the iteration converges.
    """
    if not in_I_gamma(prof.gamma, p):
        raise ValueError(f"p = {p!r} is outside the existence range for gamma = {prof.gamma!r}")
    c4 = green_constant(op, prof, p)
    return float(p ** p * (1.0 / (prof.kappa * (p + 1.0))) ** (p + 1.0) / c4)


@dataclass(frozen=True, eq=False)
class PullInResult:
    """Bisection bracket for the pull-in voltage.

    A Converged solve exists at ``lambda_lo`` (kept in ``solution_lo``);
    ``lambda_hi`` either touched down, exhausted its budget twice
    (``undecided``) or is the integral upper bound itself.
    """

    lambda_lo: float
    lambda_hi: float
    lambda_upper: float
    lambda_hash: float
    undecided_count: int
    rel_width: float
    solves: int
    solution_lo: MinimalSolveResult

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lambda_lo + self.lambda_hi)


def find_pullin(
    op: LaplaceOperator,
    prof: Profile,
    p: float,
    rel_tol: float = 1e-3,
    opts: SolveOptions | None = None,
) -> PullInResult:
    """Bracket the pull-in voltage by bisection on ``[λ#, λ_upper]``.

    A Converged solve moves the lower end up, a Touchdown moves the upper end
    down.  An exhausted budget is retried once with four times the budget;
    if it is still undecided it is counted and treated as not solvable,
    which keeps the bracket conservative.  Stops when
    ``(hi - lo)/hi <= rel_tol``.
    """
    if not 1e-4 <= rel_tol <= 1e-2:
        raise ValueError(f"rel_tol must lie in [1e-4, 1e-2], got {rel_tol!r}")
    opts = opts or SolveOptions()
    if opts.epsilon != 0.0:
        raise ValueError("pull-in bracketing is for the unregularized problem")
    lo = lam_hash = lambda_hash(op, prof, p)
    hi = upper = lambda_upper_bound(op, prof, p)
    if not lo < hi:
        raise PullInError(f"lambda_hash {lo!r} is not below lambda_upper {hi!r}")
    best = solve_minimal(op, prof, p, lo, opts)
    solves = 1
    if not best.converged:
        raise PullInError(
            f"solve at lambda_hash = {lo!r} ended with {best.status.value}; "
            "the discretization is too coarse"
        )
    undecided = 0
    while (hi - lo) / hi > rel_tol:
        mid = 0.5 * (lo + hi)
        res = solve_minimal(op, prof, p, mid, opts)
        solves += 1
        if res.status is SolveStatus.ITER_BUDGET:
            res = solve_minimal(op, prof, p, mid, replace(opts, max_iter=4 * opts.max_iter))
            solves += 1
        if res.converged:
            lo, best = mid, res
        else:
            if res.status is SolveStatus.ITER_BUDGET:
                undecided += 1
            hi = mid
    return PullInResult(lo, hi, upper, lam_hash, undecided, (hi - lo) / hi, solves, best)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """First eigenvalue of ``-Δ - pλ (a+ε-u)^{-(p+1)}`` at a minimal solution."""

    mu1: float
    phi: ScalarField
    stable: bool
    margin: float
    eigen: EigenResult


def linearized_weight(prof: Profile, p: float, lam: float, u, epsilon: float = 0.0) -> np.ndarray:
    gap = prof.a + epsilon - np.asarray(u, dtype=float)
    if not (gap > 0).all():
        raise ValueError("the solution touches the profile; the linearization is undefined")
    return p * lam * gap ** (-(p + 1.0))


def stability(
    op: LaplaceOperator,
    prof: Profile,
    p: float,
    lam: float,
    u,
    epsilon: float = 0.0,
    tol: float = 1e-8,
) -> StabilityReport:
    """Certify stability: ``stable`` iff ``μ1 > 10*tol``."""
    weight = linearized_weight(prof, p, lam, u, epsilon)
    eig = smallest_eigenvalue(op, weight, tol=tol)
    margin = 10.0 * tol
    return StabilityReport(eig.mu, eig.phi, bool(eig.mu > margin), margin, eig)


@dataclass(frozen=True)
class DecayFit:
    """Slope of ``log u`` against ``log ρ`` on ``window = (ρ_min, ρ_max)``."""

    exponent: float
    intercept: float
    window: tuple[float, float]
    r2: float
    nodes: int
    log_corrected: bool


def fit_boundary_decay(grid: Grid, u, gamma: float, p: float,
                       rho_max: float = 0.1, skip_layers: int = 4) -> DecayFit:
    """Least-squares boundary decay exponent of ``u``.

    The window keeps nodes with ``(skip_layers+1) h <= ρ <= rho_max``.  For
    ``p = 1/γ`` the fit is of ``log(u / ln(1/ρ))`` and ``log_corrected`` is set.
    Works on any grid, all nodes in the window entering the fit.

    Raises
    ------
    ValueError
        If fewer than 6 nodes fall in the window or ``u`` is not positive there.
    """
    u = np.asarray(u, dtype=float)
    rho = boundary_distance(grid)
    rho_min = (skip_layers + 1) * grid.h
    sel = (rho >= rho_min * (1 - 1e-9)) & (rho <= rho_max * (1 + 1e-12))
    if sel.sum() < 6:
        raise ValueError(f"only {int(sel.sum())} node(s) in the fit window; grid too coarse")
    if not (u[sel] > 0).all():
        raise ValueError("u must be positive inside the fit window")
    log_corrected = math.isclose(p * gamma, 1.0, rel_tol=1e-12)
    x = np.log(rho[sel])
    y = np.log(u[sel])
    if log_corrected:
        y = y - np.log(np.log(1.0 / rho[sel]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst if sst > 0 else 1.0
    return DecayFit(float(slope), float(intercept), (rho_min, rho_max), r2, int(sel.sum()), log_corrected)


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    status: SolveStatus
    sup_norm_u: float
    min_gap: float
    mu1: float | None = None
    decay_exponent: float | None = None


def sweep_lambda(
    op: LaplaceOperator,
    prof: Profile,
    p: float,
    lambdas,
    opts: SolveOptions | None = None,
    with_stability: bool = True,
    with_decay: bool = True,
) -> list[SweepRecord]:
    """Solve independently (each from zero) at every ``λ`` of a sorted list."""
    lambdas = [float(x) for x in lambdas]
    if any(not x > 0 for x in lambdas):
        raise ValueError("sweep voltages must be positive")
    if lambdas != sorted(lambdas):
        raise ValueError("sweep voltages must be sorted")
    opts = opts or SolveOptions()
    records = []
    for lam in lambdas:
        res = solve_minimal(op, prof, p, lam, opts)
        mu1 = decay = None
        gap = prof.a + opts.epsilon - res.u
        if res.converged:
            if with_stability:
                mu1 = stability(op, prof, p, lam, res.u, opts.epsilon).mu1
            if with_decay:
                try:
                    decay = fit_boundary_decay(op.grid, res.u, prof.gamma, p).exponent
                except ValueError:
                    decay = None
        records.append(SweepRecord(lam, res.status, float(np.max(res.u)), float(gap.min()), mu1, decay))
    return records


@dataclass(frozen=True)
class ExtremalRecord:
    lam: float
    status: SolveStatus
    I_beta: float
    J_q: float
    min_gap_3r: float


@dataclass(frozen=True)
class ExtremalProbe:
    """Weighted integrals along a sequence of voltages approaching pull-in.

    ``I_β = ∫ ρ^{1-β} (a-u)^{-p}``, ``J_q = ∫_{ρ>2r} (a-u)^{-pq}`` and the
    minimum of ``a - u`` on ``ρ > 3r``.  A sequence counts as bounded when
    its largest and smallest values differ by at most a factor 10.
    """

    beta: float
    q: float
    r: float
    records: list[ExtremalRecord]
    I_bounded: bool
    J_bounded: bool
    q_exceeds_f0: bool


def _within_factor(values, factor: float = 10.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(v.size and np.isfinite(v).all() and (v > 0).all() and v.max() <= factor * v.min())


def extremal_probe(
    op: LaplaceOperator,
    prof: Profile,
    p: float,
    lambdas,
    beta: float,
    q: float,
    r: float,
    opts: SolveOptions | None = None,
) -> ExtremalProbe:
    """Probe the weighted integrability of ``(a-u)^{-p}`` as ``λ`` grows.

    A ``q >= f0(p)`` is outside the range where a uniform bound is known;
    the integrals are still computed and a warning is issued.
    """
    if not 0 < beta < prof.gamma:
        raise ValueError(f"beta must lie in (0, gamma) = (0, {prof.gamma!r})")
    if not q >= 1:
        raise ValueError("q must be at least 1")
    rho = prof.rho
    if not r > 0 or not (rho > r).any():
        raise ValueError(f"r = {r!r} leaves the set rho > r empty on this grid")
    q_big = q >= f0(p)
    if q_big:
        warnings.warn(f"q = {q!r} >= f0(p) = {f0(p)!r}: no uniform bound is asserted", stacklevel=2)
    opts = opts or SolveOptions()
    grid = op.grid
    inner2, inner3 = rho > 2 * r, rho > 3 * r
    records = []
    for lam in lambdas:
        res = solve_minimal(op, prof, p, float(lam), opts)
        gap = prof.a - res.u
        if res.converged:
            I = grid.integrate(rho ** (1.0 - beta) * gap ** (-p))
            J = grid.integrate(gap[inner2] ** (-p * q))
            g3 = float(gap[inner3].min()) if inner3.any() else math.nan
        else:
            I = J = g3 = math.nan
        records.append(ExtremalRecord(float(lam), res.status, I, J, g3))
    return ExtremalProbe(
        beta, q, r, records,
        _within_factor([x.I_beta for x in records]),
        _within_factor([x.J_q for x in records]),
        q_big,
    )


def lambda_sub_star(
    op: LaplaceOperator,
    prof: Profile,
    p: float,
    lambdas,
    threshold: float = 1e-3,
    opts: SolveOptions | None = None,
) -> float | None:
    """Diagnostic for the comparability threshold of ``a - u`` with ``ρ^γ``.

    Returns the first ``λ`` of the sorted list whose minimal solution has
    ``min (a - u) ρ^{-γ}`` over the decay-fit window below ``threshold``
    (or which does not converge); ``None`` if there is none.
    """
    opts = opts or SolveOptions()
    rho = prof.rho
    h = op.grid.h
    window = (rho >= 5 * h * (1 - 1e-9)) & (rho <= 0.1 * (1 + 1e-12))
    if not window.any():
        raise ValueError("decay-fit window is empty on this grid")
    for lam in sorted(float(x) for x in lambdas):
        res = solve_minimal(op, prof, p, lam, opts)
        if not res.converged:
            return lam
        ratio = (prof.a - res.u)[window] / rho[window] ** prof.gamma
        if ratio.min() < threshold:
            return lam
    return None
