# # Stability along the minimal branch
#
# The minimal solution is stable: the first eigenvalue of the linearized
# operator ``-Δ - pλ(a-u)^{-(p+1)}`` is positive.  It decreases with ``λ`` and
# heads to zero at the fold.

# %%
import numpy as np

from closedmems import Domain, assemble, build_grid, find_pullin, make_profile, solve_minimal, stability

grid = build_grid(Domain.interval(1.0), 512)
op = assemble(grid)
prof = make_profile(grid, 0.5)
lo = find_pullin(op, prof, 1.0, rel_tol=1e-4).lambda_lo
print(f"lambda_lo = {lo:.6f}    (first Dirichlet eigenvalue pi^2 = {np.pi ** 2:.4f})")

# %%
for frac in (1e-6, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999):
    lam = frac * lo
    res = solve_minimal(op, prof, 1.0, lam)
    rep = stability(op, prof, 1.0, lam, res.u)
    print(f"{frac:7.4f} * lambda_lo   mu1 = {rep.mu1:9.5f}   "
          f"Collatz-Wielandt [{rep.eigen.lower:.5f}, {rep.eigen.upper:.5f}]")

# Near the fold mu1 falls roughly like the square root of the distance to it.
