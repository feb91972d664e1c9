# # The discrete Green operator
#
# Every solve in the package goes through one sparse M-matrix: the
# finite-difference ``-Δ`` with zero boundary values.  Here we check it against
# the one closed-form solution everybody knows, ``-u'' = 1`` on ``(0, 1)``.

# %%
import numpy as np

from closedmems import Domain, assemble, boundary_distance, build_grid, green_apply, varrho_tau

# %%
for n in (16, 64, 256):
    grid = build_grid(Domain.interval(1.0), n)
    op = assemble(grid)
    x = grid.coords[:, 0]
    u = green_apply(op, np.ones(grid.size))
    print(f"n={n:4d}  max nodal error {np.abs(u - x * (1 - x) / 2).max():.2e}  sign-exact LU: {op.sign_exact}")

# The three-point stencil is exact on quadratics, so the nodal error is roundoff.

# %% [markdown]
# ## Singular right-hand sides
#
# Near the boundary the forcing ``ρ^{τ-2}`` blows up.  The response still
# vanishes at the rate of ``ϱ_τ = ρ^{min(1, τ)}`` (with a log at ``τ = 1``).
# The ratio below stays in a fixed band as the grid is refined.

# %%
for tau in (0.5, 1.0, 1.5):
    row = []
    for n in (128, 512, 2048):
        grid = build_grid(Domain.interval(1.0), n)
        ratio = green_apply(assemble(grid), boundary_distance(grid) ** (tau - 2)) / varrho_tau(grid, tau)
        row.append(f"[{ratio.min():.3f}, {ratio.max():.3f}]")
    print(f"tau={tau}: " + "  ".join(row))
