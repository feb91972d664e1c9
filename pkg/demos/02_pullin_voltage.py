# # Minimal solutions and the pull-in voltage
#
# For ``-u'' = λ/(a-u)`` with ``a = ρ^{1/2}`` on ``(0, 1)``, monotone iteration
# from zero converges for small ``λ`` and runs into the plate beyond a fold.
# Bisection between a guaranteed-solvable voltage and an integral upper bound
# brackets that fold.

# %%
from closedmems import (
    Domain,
    assemble,
    build_grid,
    find_pullin,
    lambda_hash,
    lambda_upper_bound,
    make_profile,
    solve_minimal,
)

grid = build_grid(Domain.interval(1.0), 256)
op = assemble(grid)
prof = make_profile(grid, gamma=0.5)

print("lambda_hash  =", lambda_hash(op, prof, 1.0))
print("lambda_upper =", lambda_upper_bound(op, prof, 1.0))

# %%
for lam in (0.2, 0.6, 0.7, 0.75, 1.0):
    res = solve_minimal(op, prof, 1.0, lam)
    print(f"lambda={lam:5.2f}  {res.status.value:10s}  iterations={res.iterations:5d}  "
          f"max u={res.u.max():.4f}  min gap={res.min_gap:.2e}")

# %% [markdown]
# The bracket barely moves when the grid is refined.

# %%
for n in (128, 256, 512, 1024):
    g = build_grid(Domain.interval(1.0), n)
    o = assemble(g)
    pr = find_pullin(o, make_profile(g, 0.5), 1.0, rel_tol=1e-4)
    print(f"n={n:5d}  [{pr.lambda_lo:.6f}, {pr.lambda_hi:.6f}]  solves={pr.solves}")

# %% [markdown]
# Larger ``p`` means a stronger nonlinearity (``a - u < 1``) and an earlier fold.

# %%
for p in (0.5, 1.0, 2.0, 3.0):
    pr = find_pullin(op, prof, p)
    print(f"p={p}:  lambda* in [{pr.lambda_lo:.5f}, {pr.lambda_hi:.5f}]")
