"""Ground-plate profile and the monotone iteration for the minimal solution.

The minimal solution of ``-Δu = λ (a + ε - u)^{-p}``, ``u = 0`` on the
boundary, is the increasing limit of

    v_0 = 0,    v_n = λ G[(a + ε - v_{n-1})^{-p}].

The iteration is run in increment form, ``v_n = v_{n-1} + λ G[f_{n-1} - f_{n-2}]``
with ``f_k = (a + ε - v_k)^{-p}`` and ``f_{-1} = 0``.  This is algebraically
the same sequence, but the right-hand side of every solve is a difference of
ordered numbers and hence exactly nonnegative, so with a sign-exact LU
factor each increment is exactly nonnegative in floating point as well.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Grid, ScalarField, boundary_distance, build_grid
from .operators import LaplaceOperator, assemble, green_apply

__all__ = [
    "ProfileShape",
    "Profile",
    "ProfileError",
    "make_profile",
    "SolveOptions",
    "SolveStatus",
    "MinimalSolveResult",
    "MonotonicityError",
    "solve_minimal",
    "residual_norm",
    "BoundReport",
    "check_minimal_bounds",
]


class ProfileError(ValueError):
    """The profile violates ``ρ^γ/κ <= a <= κ ρ^γ`` or ``0 < a <= 1``."""


class MonotonicityError(AssertionError):
    """An iterate decreased somewhere; the discrete maximum principle failed."""


class ProfileShape(str, enum.Enum):
    PURE_POWER = "pure"
    MODULATED = "modulated"


@dataclass(frozen=True, eq=False)
class Profile:
    """Ground-plate profile ``a`` sampled at the interior nodes."""

    grid: Grid
    a: ScalarField
    rho: ScalarField
    gamma: float
    kappa: float
    shape: ProfileShape

    def verify(self) -> None:
        lo = self.rho ** self.gamma / self.kappa
        hi = self.kappa * self.rho ** self.gamma
        if not np.isfinite(self.a).all():
            raise ProfileError("profile is not finite")
        if (self.a < lo).any() or (self.a > hi).any():
            bad = int(((self.a < lo) | (self.a > hi)).sum())
            raise ProfileError(
                f"two-sided bound with kappa={self.kappa} fails at {bad} node(s)"
            )
        if (self.a <= 0).any() or (self.a > 1).any():
            raise ProfileError("profile must satisfy 0 < a <= 1 at interior nodes")

    @classmethod
    def from_values(cls, grid: Grid, a, gamma: float, kappa: float = 1.0, check: bool = True) -> "Profile":
        """Wrap explicit nodal values; ``check=False`` skips the bound test."""
        prof = cls(grid, np.asarray(a, dtype=float).copy(), boundary_distance(grid),
                   float(gamma), float(kappa), ProfileShape.MODULATED)
        if check:
            prof.verify()
        return prof


def modulation_amplitude(gamma: float, kappa: float) -> float:
    """Largest amplitude ``≤ 1/2`` keeping ``1 ± δ`` inside ``[1/κ, κ]`` and ``a <= 1``."""
    return max(0.0, min(0.5, 1.0 - 1.0 / kappa, kappa - 1.0, 2.0 ** gamma - 1.0))


def make_profile(grid: Grid, gamma: float, kappa: float = 1.0, shape="pure") -> Profile:
    """Build ``a = ρ^γ`` (pure power) or ``a = ρ^γ (1 + δ sin(2π x·1 / L))``.

    The modulated shape uses the amplitude from :func:`modulation_amplitude`,
    so the bound holds by construction; it is still checked node by node.
    """
    shape = ProfileShape(shape)
    if not gamma > 0:
        raise ProfileError(f"gamma must be positive, got {gamma!r}")
    if not kappa >= 1:
        raise ProfileError(f"kappa must be >= 1, got {kappa!r}")
    if shape is ProfileShape.PURE_POWER and kappa != 1.0:
        raise ProfileError("the pure-power profile has kappa = 1")
    rho = boundary_distance(grid)
    a = rho ** gamma
    if shape is ProfileShape.MODULATED:
        delta = modulation_amplitude(gamma, kappa)
        phase = 2.0 * np.pi * grid.coords.sum(axis=1) / grid.domain.extents[0]
        a = a * (1.0 + delta * np.sin(phase))
    prof = Profile(grid, a, rho, float(gamma), float(kappa), shape)
    prof.verify()
    return prof


@dataclass(frozen=True)
class SolveOptions:
    """Stopping rules for :func:`solve_minimal`.

    ``tol=None`` means ``1e-10 * max(a)``.
    """

    tol: float | None = None
    max_iter: int = 10_000
    touch_eps: float = 1e-12
    epsilon: float = 0.0

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.touch_eps > 0:
            raise ValueError("touch_eps must be positive")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def resolved_tol(self, prof: Profile) -> float:
        return self.tol if self.tol is not None else 1e-10 * float(prof.a.max())


class SolveStatus(str, enum.Enum):
    CONVERGED = "Converged"
    TOUCHDOWN = "Touchdown"
    ITER_BUDGET = "IterBudget"


@dataclass(frozen=True, eq=False)
class MinimalSolveResult:
    """Outcome of the monotone iteration.

    ``trace_increment[k]`` and ``trace_gap[k]`` are ``sup(v_k - v_{k-1})`` and
    ``min(a + ε - v_k)`` for ``k = trace_iteration[k]``.
    """

    status: SolveStatus
    u: ScalarField
    lam: float
    p: float
    epsilon: float
    tol: float
    residual: float
    iterations: int
    trace_iteration: np.ndarray
    trace_increment: np.ndarray
    trace_gap: np.ndarray
    monotone_violations: int = 0
    options: SolveOptions = field(default_factory=SolveOptions)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    @property
    def shrinking(self) -> bool:
        """For an exhausted budget: were the last increments still decreasing?"""
        inc = self.trace_increment[-20:]
        return bool(len(inc) > 1 and np.all(np.diff(inc) <= 0) and inc[-1] > 0)

    @property
    def min_gap(self) -> float:
        return float(self.trace_gap[-1]) if len(self.trace_gap) else math.nan


def _nonlinearity(gap: np.ndarray, p: float) -> np.ndarray:
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return 1.0 / gap ** p


def residual_norm(op: LaplaceOperator, prof: Profile, p: float, lam: float, u, epsilon: float = 0.0) -> float:
    """``||A u - λ (a+ε-u)^{-p}|| / ||λ (a+ε-u)^{-p}||`` in the discrete L2 norm.

    With ``λ = 0`` the unscaled norm ``||A u||`` is returned.
    """
    u = np.asarray(u, dtype=float)
    gap = prof.a + epsilon - u
    if not (gap > 0).all():
        raise ValueError("a + epsilon - u must be positive at every interior node")
    forcing = lam * _nonlinearity(gap, p)
    num = np.linalg.norm(op.matrix @ u - forcing)
    den = np.linalg.norm(forcing)
    return float(num / den) if den > 0 else float(num)


def solve_minimal(
    op: LaplaceOperator,
    prof: Profile,
    p: float,
    lam: float,
    opts: SolveOptions | None = None,
) -> MinimalSolveResult:
    """Minimal solution by monotone iteration from ``v_0 = 0``.

    Statuses: ``Converged`` once ``sup(v_n - v_{n-1}) <= tol`` (the relative
    residual is then computed and stored, not used to stop); ``Touchdown`` when
    ``min(a + ε - v_n) <= touch_eps`` or the nonlinearity overflows;
    ``IterBudget`` after ``max_iter`` steps.

    Raises
    ------
    MonotonicityError
        If any increment is negative at any node.
    """
    opts = opts or SolveOptions()
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    if not lam >= 0:
        raise ValueError(f"lambda must be nonnegative, got {lam!r}")
    if prof.grid is not op.grid:
        raise ValueError("profile and operator live on different grids")
    tol = opts.resolved_tol(prof)
    ceiling = prof.a + opts.epsilon

    v = np.zeros(op.size)
    f_prev = np.zeros(op.size)
    f_cur = _nonlinearity(ceiling, p)
    its, incs, gaps = [], [], []
    violations = 0
    residual = math.inf
    status = SolveStatus.ITER_BUDGET
    n = 0
    for n in range(1, opts.max_iter + 1):
        d = lam * green_apply(op, f_cur - f_prev)
        neg = int((d < 0).sum())
        if neg:
            violations += neg
            raise MonotonicityError(
                f"iterate decreased at {neg} node(s) in step {n} (min increment {d.min():.3e})"
            )
        v = v + d
        gap = ceiling - v
        increment = float(d.max()) if d.size else 0.0
        min_gap = float(gap.min())
        its.append(n)
        incs.append(increment)
        gaps.append(min_gap)
        if not min_gap > opts.touch_eps:
            status = SolveStatus.TOUCHDOWN
            break
        f_next = _nonlinearity(gap, p)
        if not np.isfinite(f_next).all():
            status = SolveStatus.TOUCHDOWN
            break
        f_prev, f_cur = f_cur, f_next
        if increment <= tol:
            status = SolveStatus.CONVERGED
            break

    if status is SolveStatus.CONVERGED:
        residual = residual_norm(op, prof, p, lam, v, opts.epsilon)
    return MinimalSolveResult(
        status=status,
        u=v,
        lam=float(lam),
        p=float(p),
        epsilon=float(opts.epsilon),
        tol=tol,
        residual=residual,
        iterations=n,
        trace_iteration=np.asarray(its, dtype=np.int64),
        trace_increment=np.asarray(incs),
        trace_gap=np.asarray(gaps),
        monotone_violations=violations,
        options=opts,
    )


@dataclass(frozen=True)
class BoundReport:
    """Discrete surrogates of the two-sided bound on the minimal solution.

    ``c_up = max u / (λ ρ^γ)`` and ``c_low = max λ w / u`` with
    ``w = ρ^{min(1, 2 - pγ)}`` (``ρ ln(1/ρ)`` when ``p = 1/γ``).  The
    ``*_fine`` values come from the same problem on a grid with twice the
    resolution.
    """

    c_up: float
    c_low: float
    c_up_fine: float
    c_low_fine: float
    log_branch: bool
    excluded: int
    passed: bool


def _lower_weight(rho: np.ndarray, gamma: float, p: float) -> tuple[np.ndarray, bool]:
    if math.isclose(p * gamma, 1.0, rel_tol=1e-12):
        return rho * np.log(1.0 / rho), True
    return rho ** min(1.0, 2.0 - p * gamma), False


def _bound_constants(res: MinimalSolveResult, prof: Profile) -> tuple[float, float, bool, int]:
    w, log_branch = _lower_weight(prof.rho, prof.gamma, res.p)
    ok = res.u > np.finfo(float).tiny
    c_up = float(np.max(res.u[ok] / (res.lam * prof.rho[ok] ** prof.gamma)))
    c_low = float(np.max(res.lam * w[ok] / res.u[ok]))
    return c_up, c_low, log_branch, int((~ok).sum())


def check_minimal_bounds(result: MinimalSolveResult, prof: Profile) -> BoundReport:
    """Measure the bound constants and their stability under one refinement.

    Passes when all four constants are finite and each fine-grid constant is
    within a factor 2 of its coarse-grid value.
    """
    if result.status is not SolveStatus.CONVERGED:
        raise ValueError("bounds are only defined for a Converged solve")
    if result.epsilon != 0.0:
        raise ValueError("bounds refer to the unregularized problem (epsilon = 0)")
    if result.u.shape != prof.a.shape or not (result.u < prof.a).all():
        raise ValueError("result is not a solution below the profile")
    if not result.lam > 0:
        raise ValueError("bounds need lambda > 0")
    c_up, c_low, log_branch, excluded = _bound_constants(result, prof)

    fine_grid = build_grid(prof.grid.domain, 2 * prof.grid.n)
    fine_op = assemble(fine_grid)
    fine_prof = make_profile(fine_grid, prof.gamma, prof.kappa, prof.shape)
    fine = solve_minimal(fine_op, fine_prof, result.p, result.lam, replace(result.options, tol=None))
    if fine.status is not SolveStatus.CONVERGED:
        return BoundReport(c_up, c_low, math.nan, math.nan, log_branch, excluded, False)
    c_up_f, c_low_f, _, excl_f = _bound_constants(fine, fine_prof)
    values = np.array([c_up, c_low, c_up_f, c_low_f])
    passed = bool(
        np.isfinite(values).all()
        and (values > 0).all()
        and 0.5 <= c_up_f / c_up <= 2.0
        and 0.5 <= c_low_f / c_low <= 2.0
    )
    return BoundReport(c_up, c_low, c_up_f, c_low_f, log_branch, excluded + excl_f, passed)
