# # Which (γ, p, N) admit solutions, and how regular is the extremal one?

# %%
from closedmems import (
    Domain,
    SolveStatus,
    assemble,
    build_grid,
    classify,
    extremal_probe,
    find_pullin,
    make_profile,
    sweep_lambda,
)
from closedmems.analysis import lambda_p0_limit

for gamma, p, N in [(0.5, 1.0, 3), (1.0, 0.95, 2), (0.5, 4.0, 2), (1.5, 1.0, 1), (0.2, 0.5, 11)]:
    r = classify(gamma, p, N)
    extra = f"  alpha={r.alpha:.4f}" if r.alpha is not None else ""
    print(f"gamma={gamma} p={p} N={N:2d}: {r.regime.value:24s} {r.extremal.value if r.extremal else '-'}{extra}")

# %% [markdown]
# ## Weighted integrals approaching the fold
#
# In the classical regime ``(a-u)^{-p}`` stays integrable against ``ρ^{1-β}``
# up to the extremal voltage, and the gap stays open away from the boundary.

# %%
grid = build_grid(Domain.interval(1.0), 512)
op = assemble(grid)
prof = make_profile(grid, 0.5)
lo = find_pullin(op, prof, 1.0).lambda_lo
probe = extremal_probe(op, prof, 1.0, [f * lo for f in (0.9, 0.99, 0.999)], beta=0.25, q=2.0, r=0.1)
for rec in probe.records:
    print(f"lambda={rec.lam:.5f}  I={rec.I_beta:.4f}  J={rec.J_q:.4f}  min gap on rho>0.3: {rec.min_gap_3r:.4f}")

# %% [markdown]
# ## Nonexistence, as seen by a grid
#
# For ``γ > 1`` no solution exists for any ``λ > 0``.  A fixed grid still
# solves for tiny voltages; the solvable range shrinks as the grid is refined.

# %%
for n in (128, 512, 2048):
    g = build_grid(Domain.interval(1.0), n)
    o = assemble(g)
    pr = make_profile(g, 1.5)
    scale = lambda_p0_limit(o, pr)
    recs = sweep_lambda(o, pr, 1.0, [scale * 10.0 ** k for k in range(-6, 1)], with_stability=False, with_decay=False)
    ok = [f"{r.lam / scale:.0e}" for r in recs if r.status is SolveStatus.CONVERGED]
    print(f"n={n:5d}  converged at lambda/scale = {', '.join(ok)}")
