# # The disk: Shortley-Weller boundary legs
#
# On the unit disk the grid is cut by the circle.  Legs that cross it are
# shortened to the exact crossing, which keeps second-order accuracy and the
# M-matrix sign pattern but breaks symmetry of the matrix.

# %%
import numpy as np

from closedmems import Domain, assemble, build_grid, find_pullin, green_apply, make_profile, solve_minimal, stability

for n in (16, 32, 64):
    grid = build_grid(Domain.disk(1.0), n)
    op = assemble(grid)
    u = green_apply(op, np.ones(grid.size))
    exact = (1 - (grid.coords ** 2).sum(axis=1)) / 4
    print(f"n={n:3d}  nodes={grid.size:5d}  cut nodes={grid.shortley_weller.sum():4d}  "
          f"symmetric={op.symmetric}  err={np.abs(u - exact).max():.1e}")

# %%
grid = build_grid(Domain.disk(1.0), 96)
op = assemble(grid)
prof = make_profile(grid, 0.5)
pr = find_pullin(op, prof, 1.0)
print(f"pull-in bracket on the disk: [{pr.lambda_lo:.5f}, {pr.lambda_hi:.5f}]")
res = solve_minimal(op, prof, 1.0, 0.9 * pr.lambda_lo)
print(f"mu1 at 0.9 lambda_lo: {stability(op, prof, 1.0, res.lam, res.u).mu1:.4f}")
for perm in grid.mirror_permutations():
    print("mirror asymmetry of u:", np.abs(res.u[perm] - res.u).max())
