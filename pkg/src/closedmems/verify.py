"""Deterministic property suite behind ``mems verify``.

Each check returns a :class:`PropertyResult`; nothing here draws random
numbers, so two runs on the same machine produce identical reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import find_pullin, lambda_hash, lambda_upper_bound, stability
from .core import MonotonicityError, SolveOptions, make_profile, solve_minimal
from .geometry import Domain, build_grid
from .operators import assemble, check_m_matrix, green_apply, smallest_eigenvalue
from .regimes import f0, holder_alpha, in_I_gamma, p_sharp, p_star, q_sharp

__all__ = ["PropertyResult", "run_suite", "format_report"]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool | None  # None: not applicable to this configuration
    detail: str

    @property
    def label(self) -> str:
        return {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]


def _interp_midpoint_error(n: int) -> tuple[float, float]:
    """Max nodal error and max error of the linear interpolant at cell midpoints."""
    grid = build_grid(Domain.interval(1.0), n)
    u = green_apply(assemble(grid), np.ones(grid.size))
    x = grid.coords[:, 0]
    nodal = float(np.abs(u - x * (1 - x) / 2).max())
    xs = np.concatenate(([0.0], x, [1.0]))
    us = np.concatenate(([0.0], u, [0.0]))
    xm = 0.5 * (xs[1:] + xs[:-1])
    um = 0.5 * (us[1:] + us[:-1])
    return nodal, float(np.abs(um - xm * (1 - xm) / 2).max())


def check_green_oracle() -> PropertyResult:
    nod64, e64 = _interp_midpoint_error(64)
    nod128, e128 = _interp_midpoint_error(128)
    ratio = e64 / e128
    ok = e64 <= 1e-3 and abs(ratio - 4) <= 0.8 and max(nod64, nod128) <= 1e-12
    return PropertyResult("green_oracle", ok, f"err64={e64:.6e} ratio={ratio:.6f} nodal={max(nod64, nod128):.3e}")


def check_quadratic_exactness() -> PropertyResult:
    """Solutions that are quadratic along every axis are reproduced to roundoff."""
    worst = 0.0
    for dom, n in ((Domain.interval(1.0), 16), (Domain.rectangle(1.0, 1.0), 16), (Domain.disk(1.0), 17)):
        grid = build_grid(dom, n)
        c = grid.coords
        if dom.kind.value == "disk":
            exact, f = (1.0 - (c ** 2).sum(axis=1)) / 4.0, np.ones(grid.size)
        elif grid.dim == 2:
            x, y = c.T
            exact, f = x * (1 - x) * y * (1 - y), 2 * x * (1 - x) + 2 * y * (1 - y)
        else:
            exact, f = c[:, 0] * (1 - c[:, 0]) / 2, np.ones(grid.size)
        u = green_apply(assemble(grid), f)
        worst = max(worst, float(np.abs(u - exact).max()))
    return PropertyResult("quadratic_exactness", worst <= 1e-10, f"max_err={worst:.3e}")


def check_m_matrices() -> PropertyResult:
    kinds = []
    for dom, n in ((Domain.interval(1.0), 32), (Domain.rectangle(1.0, 2.0), 16), (Domain.disk(1.0), 21)):
        grid = build_grid(dom, n)
        op = assemble(grid)
        check_m_matrix(op.matrix, grid.boundary_adjacent)
        kinds.append(op.sign_exact)
    return PropertyResult("m_matrix_sign_exact_lu", all(kinds), f"sign_exact={kinds}")


def check_comparison() -> PropertyResult:
    grid = build_grid(Domain.disk(1.0), 24)
    op = assemble(grid)
    x, y = grid.coords.T
    f = 1.0 + np.cos(3 * x) ** 2 + y ** 2
    g = f - (np.sin(5 * y) ** 2)
    uf, ug = green_apply(op, f), green_apply(op, g)
    ok = bool((uf - ug >= 0).all() and (ug >= 0).all())
    return PropertyResult("discrete_comparison", ok, f"min(Gf-Gg)={float((uf - ug).min()):.3e}")


def check_eigen() -> PropertyResult:
    grid = build_grid(Domain.interval(1.0), 64)
    op = assemble(grid)
    mu0 = smallest_eigenvalue(op, np.zeros(grid.size)).mu
    mu3 = smallest_eigenvalue(op, np.full(grid.size, 3.0)).mu
    exact = 4 * 64 ** 2 * math.sin(math.pi / 128) ** 2
    ok = abs(mu0 - exact) <= 1e-6 * exact and abs((mu0 - mu3) - 3.0) <= 1e-6
    return PropertyResult("eigen_shift_identity", ok, f"mu0={mu0:.10f} exact={exact:.10f} mu0-mu3={mu0 - mu3:.10f}")


def check_classifier() -> list[PropertyResult]:
    out = []
    ok = p_star(0.5) == 3.0 and p_star(1.0) == 1.0 and math.isinf(p_sharp(6)) and p_sharp(11) == 1 / 3
    ok = ok and math.isinf(q_sharp(12))
    out.append(PropertyResult("classifier_closed_forms", ok,
                              f"p_star(0.5)={p_star(0.5)!r} p_sharp(11)={p_sharp(11)!r}"))
    ts = np.logspace(-3, 6, 200)
    vals = np.array([f0(t) for t in ts])
    ok = bool(np.all(np.diff(vals) < 0) and abs(vals[-1] - 5) < 1e-5)
    out.append(PropertyResult("f0_decreasing_to_5", ok, f"f0(1e6)={vals[-1]:.9f}"))
    dev_p = max(abs(f0(p_sharp(N)) - N) for N in range(7, 13))
    dev_q = max(abs(f0(q_sharp(N)) - N / 2) for N in range(13, 17))
    out.append(PropertyResult("classifier_defining_identities", dev_p <= 1e-10 and dev_q <= 1e-10,
                              f"max|f0(p_sharp)-N|={dev_p:.6g} max|f0(q_sharp)-N/2|={dev_q:.6g}"))
    dev_a = max(abs(holder_alpha(p_sharp(N), N) - 1.0) for N in range(7, 13))
    out.append(PropertyResult("holder_alpha_at_p_sharp", dev_a <= 1e-10, f"max|alpha-1|={dev_a:.6g}"))
    return out


def check_solver(domain: Domain, n: int, gamma: float, p: float, kappa: float, shape: str) -> list[PropertyResult]:
    names = ["monotone_iteration", "lambda_hash_solvable", "lambda_monotone", "epsilon_comparison",
             "bracket_invariant", "stability_decreasing"]
    if not in_I_gamma(gamma, p) or (domain.kind.value == "interval" and n < 32):
        return [PropertyResult(k, None, "parameters outside the existence range or grid too coarse") for k in names]
    grid = build_grid(domain, n)
    op = assemble(grid)
    prof = make_profile(grid, gamma, kappa, shape)
    out = []
    lam_h = lambda_hash(op, prof, p)
    lam_u = lambda_upper_bound(op, prof, p)

    try:
        res_h = solve_minimal(op, prof, p, lam_h)
        mu_star = 1.0 / (kappa * (p + 1))
        ok = res_h.converged and bool((res_h.u <= mu_star * prof.rho ** gamma).all())
        out.append(PropertyResult("monotone_iteration", res_h.monotone_violations == 0,
                                  f"iterations={res_h.iterations} violations={res_h.monotone_violations}"))
        out.append(PropertyResult("lambda_hash_solvable", ok, f"lambda_hash={lam_h:.8g} status={res_h.status.value}"))
    except MonotonicityError as exc:
        out.append(PropertyResult("monotone_iteration", False, str(exc)))
        out.append(PropertyResult("lambda_hash_solvable", False, "aborted"))

    pull = find_pullin(op, prof, p, rel_tol=1e-3)
    lo = pull.lambda_lo
    fracs = [0.25, 0.5, 0.75, 0.9]
    sols = [solve_minimal(op, prof, p, f * lo) for f in fracs]
    ok = all(s.converged for s in sols) and all(bool((b.u >= a.u).all()) for a, b in zip(sols, sols[1:]))
    out.append(PropertyResult("lambda_monotone", ok, f"sup_u={[round(float(s.u.max()), 8) for s in sols]}"))

    base = sols[1]
    devs = []
    ok = True
    for k in range(1, 7):
        w = solve_minimal(op, prof, p, 0.5 * lo, SolveOptions(epsilon=10.0 ** (-k)))
        ok = ok and w.converged and bool((w.u <= base.u).all())
        devs.append(float(np.abs(w.u - base.u).max()))
    ok = ok and all(b < a for a, b in zip(devs, devs[1:]))
    out.append(PropertyResult("epsilon_comparison", ok, f"sup|w-u|={[float(f'{d:.4g}') for d in devs]}"))

    ok = lam_h <= pull.lambda_lo < pull.lambda_hi <= lam_u
    out.append(PropertyResult("bracket_invariant", ok,
                              f"[{pull.lambda_lo:.8g}, {pull.lambda_hi:.8g}] within [{lam_h:.8g}, {lam_u:.8g}]"))

    mus = [stability(op, prof, p, s.lam, s.u).mu1 for s in sols]
    ok = mus[-1] > 0 and all(b < a for a, b in zip(mus, mus[1:]))
    out.append(PropertyResult("stability_decreasing", ok, f"mu1={[float(f'{m:.6g}') for m in mus]}"))
    return out


def run_suite(domain: Domain | None = None, n: int = 128, gamma: float = 0.5, p: float = 1.0,
              kappa: float = 1.0, shape: str = "pure") -> list[PropertyResult]:
    """All properties, fixed order.  Solver checks use the given problem (``n`` capped at 256)."""
    domain = domain or Domain.interval(1.0)
    results = [check_green_oracle(), check_quadratic_exactness(), check_m_matrices(),
               check_comparison(), check_eigen()]
    results += check_classifier()
    results += check_solver(domain, min(int(n), 256), gamma, p, kappa, shape)
    return results


def format_report(results: list[PropertyResult]) -> str:
    width = max(len(r.name) for r in results)
    return "".join(f"{r.label} {r.name:<{width}}  {r.detail}\n" for r in results)
