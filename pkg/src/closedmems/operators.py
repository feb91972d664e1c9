"""Discrete Dirichlet Laplacian, Green operator and linearized eigenvalue.

The assembled matrix ``A`` approximates ``-Δ`` on the interior nodes.  It is
a nonsingular M-matrix (positive diagonal, nonpositive off-diagonals, weakly
diagonally dominant with strict dominance on boundary-adjacent rows), so the
discrete maximum principle holds: ``f >= 0`` implies ``A^{-1} f >= 0``.

The sparse LU factor is computed with a symmetric permutation and no row
pivoting.  For an M-matrix the factors then keep the sign pattern of ``A``
(``L`` and ``U`` with nonpositive off-diagonals), and forward/back
substitution on a nonnegative right-hand side only ever adds nonnegative
terms.  :attr:`LaplaceOperator.sign_exact` records that this was verified,
which is what lets the monotone iteration assert ``v_n >= v_{n-1}`` with no
tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import Grid, ScalarField

__all__ = [
    "LaplaceOperator",
    "EigenResult",
    "SolverError",
    "MMatrixError",
    "assemble",
    "green_apply",
    "green_apply_transpose",
    "smallest_eigenvalue",
]

#: Above this many unknowns the Green solve switches to Krylov iterations.
DIRECT_LIMIT = 250_000
ITERATIVE_RTOL = 1e-10


class SolverError(RuntimeError):
    """A linear or eigen solve did not reach its tolerance."""


class MMatrixError(ValueError):
    """The assembled operator is not an M-matrix."""


def _lu(matrix: sp.spmatrix):
    return spla.splu(
        sp.csc_matrix(matrix),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options=dict(SymmetricMode=True),
    )


def _factor_is_sign_exact(lu) -> bool:
    if not np.array_equal(lu.perm_r, lu.perm_c):
        return False
    for factor in (lu.L.tocoo(), lu.U.tocoo()):
        off = factor.row != factor.col
        if off.any() and factor.data[off].max() > 0.0:
            return False
    return bool(lu.U.diagonal().min() > 0.0)


@dataclass(frozen=True, eq=False)
class LaplaceOperator:
    """Assembled ``-Δ`` with zero Dirichlet data.

    Attributes
    ----------
    grid : Grid
    matrix : scipy.sparse.csr_matrix
    symmetric : bool
        False for the disk, where Shortley-Weller rows break symmetry.
    method : {"direct", "iterative"}
    sign_exact : bool
        True when the LU factors were checked to preserve the sign pattern.
    """

    grid: Grid
    matrix: sp.csr_matrix
    symmetric: bool
    method: str
    sign_exact: bool
    _lu: object = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _stencil(grid: Grid) -> sp.csr_matrix:
    M = grid.size
    h2 = grid.h * grid.h
    rows, cols, vals = [], [], []
    diag = np.zeros(M)
    node = np.arange(M)
    for ax in range(grid.dim):
        nb_lo, nb_hi = grid.neighbors[:, 2 * ax], grid.neighbors[:, 2 * ax + 1]
        s_lo, s_hi = grid.fractions[:, 2 * ax], grid.fractions[:, 2 * ax + 1]
        # nonuniform three-point second difference, exact for quadratics
        c_lo = 2.0 / (h2 * s_lo * (s_lo + s_hi))
        c_hi = 2.0 / (h2 * s_hi * (s_lo + s_hi))
        diag += 2.0 / (h2 * s_lo * s_hi)
        for nb, c in ((nb_lo, c_lo), (nb_hi, c_hi)):
            keep = nb >= 0
            rows.append(node[keep])
            cols.append(nb[keep])
            vals.append(-c[keep])
    rows.append(node)
    cols.append(node)
    vals.append(diag)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(M, M)
    )
    return A.tocsr()


def check_m_matrix(matrix: sp.spmatrix, boundary_rows: np.ndarray) -> None:
    """Raise :class:`MMatrixError` unless ``matrix`` has the M-matrix pattern."""
    A = sp.coo_matrix(matrix)
    off = A.row != A.col
    d = A.diagonal()
    if d.min() <= 0.0:
        raise MMatrixError("nonpositive diagonal entry")
    if off.any() and A.data[off].max() > 0.0:
        raise MMatrixError("positive off-diagonal entry")
    rowsum = np.asarray(sp.csr_matrix(matrix).sum(axis=1)).ravel()
    if (rowsum < -1e-12 * d).any():
        raise MMatrixError("row is not weakly diagonally dominant")
    if not (rowsum[boundary_rows] > 0.0).all():
        raise MMatrixError("boundary-adjacent row is not strictly diagonally dominant")


def assemble(grid: Grid, method: str = "auto") -> LaplaceOperator:
    """Assemble ``-Δ`` on ``grid`` and factor it.

    Interior rows use the 3-point (1-D) or 5-point (2-D) stencil; on the disk
    a leg of length ``s*h`` towards the circle gives the Shortley-Weller
    weight ``2/(h**2 s (1+s))`` on the opposite regular neighbour side and
    drops the boundary value.  The M-matrix pattern is checked here and a
    violation is fatal.
    """
    A = _stencil(grid)
    check_m_matrix(A, grid.boundary_adjacent)
    symmetric = bool(abs(A - A.T).max() == 0.0) if A.nnz else True
    if method == "auto":
        method = "direct" if grid.size <= DIRECT_LIMIT else "iterative"
    if method not in ("direct", "iterative"):
        raise ValueError(f"unknown solve method {method!r}")
    lu, exact = None, False
    if method == "direct":
        lu = _lu(A)
        exact = _factor_is_sign_exact(lu)
    return LaplaceOperator(grid, A, symmetric, method, exact, lu)


def _check_rhs(op: LaplaceOperator, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (op.size,):
        raise ValueError(f"field has shape {f.shape}, expected ({op.size},)")
    if not np.isfinite(f).all():
        raise ValueError("right-hand side is not finite")
    return f


def _krylov(op: LaplaceOperator, f: np.ndarray, transpose: bool = False) -> np.ndarray:
    A = op.matrix.T.tocsr() if transpose else op.matrix
    solver = spla.cg if op.symmetric else spla.bicgstab
    u, info = solver(A, f, rtol=ITERATIVE_RTOL, atol=0.0, maxiter=20 * op.size)
    if info != 0:
        res = np.linalg.norm(A @ u - f) / max(np.linalg.norm(f), 1e-300)
        raise SolverError(f"{solver.__name__} did not converge (info={info}, rel. residual {res:.3e})")
    return u


def green_apply(op: LaplaceOperator, f: ScalarField) -> ScalarField:
    """Solve ``A u = f``: the discrete Green operator applied to ``f``."""
    f = _check_rhs(op, f)
    if not f.any():
        return np.zeros_like(f)
    if op.method == "direct":
        return op._lu.solve(f)
    return _krylov(op, f)


def green_apply_transpose(op: LaplaceOperator, f: ScalarField) -> ScalarField:
    """Solve ``A^T u = f`` (equals :func:`green_apply` when ``A`` is symmetric)."""
    if op.symmetric:
        return green_apply(op, f)
    f = _check_rhs(op, f)
    if op.method == "direct":
        return op._lu.solve(f, trans="T")
    return _krylov(op, f, transpose=True)


@dataclass(frozen=True)
class EigenResult:
    """Smallest eigenpair of ``A - diag(weight)``.

    ``phi`` is positive and has unit discrete L2 norm
    (``sqrt(sum(phi**2) * h**dim) == 1``).  ``lower``/``upper`` are the
    Collatz-Wielandt bounds ``min``/``max`` of ``(B phi)_i / phi_i``, which
    bracket ``mu`` for any positive ``phi``.
    """

    mu: float
    phi: ScalarField
    iterations: int
    residual: float
    lower: float
    upper: float
    shift: float


def _l2(grid: Grid, v: np.ndarray) -> float:
    return float(np.sqrt(np.dot(v, v) * grid.cell_volume))


def _collatz_wielandt(Bx: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    if not (x > 0).all():
        return -np.inf, np.inf
    q = Bx / x
    return float(q.min()), float(q.max())


def smallest_eigenvalue(
    op: LaplaceOperator,
    weight: ScalarField,
    tol: float = 1e-8,
    max_iter: int = 20_000,
) -> EigenResult:
    """Smallest eigenvalue of ``A - diag(weight)`` by shifted inverse iteration.

    The first shift is ``-max(weight, 0)``, which leaves
    ``A - diag(weight) - shift*I`` a nonsingular M-matrix.  Once the
    estimate settles, the shift is raised to just below the Collatz-Wielandt
    lower bound of the current (positive) iterate; that bound never exceeds
    the true eigenvalue, so the shifted matrix stays an M-matrix while the
    convergence ratio improves.

    Stops when successive estimates differ by less than ``tol*(1+|mu|)`` and
    the residual ``||(A - W) phi - mu phi||`` (discrete L2) is below ``tol``.

    Raises
    ------
    SolverError
        If ``max_iter`` iterations pass without meeting both criteria.
    """
    grid = op.grid
    w = np.asarray(weight, dtype=float)
    if w.shape != (op.size,) or not np.isfinite(w).all():
        raise ValueError("weight must be a finite field on the grid")
    B = (op.matrix - sp.diags(w)).tocsc()
    I = sp.identity(op.size, format="csc")

    shift = -max(float(w.max()), 0.0)
    lu = _lu(B - shift * I)
    x = np.ones(op.size)
    x /= _l2(grid, x)
    mu_old = np.inf
    residual = np.inf
    reshifts = 0
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / _l2(grid, y)
        if x.sum() < 0:
            x = -x
        Bx = B @ x
        mu = float(np.dot(x, Bx) / np.dot(x, x))
        r = Bx - mu * x
        residual = _l2(grid, r)
        change = abs(mu - mu_old)
        if change < tol * (1.0 + abs(mu)) and residual < tol:
            lo, hi = _collatz_wielandt(Bx, x)
            return EigenResult(mu, x, it, residual, lo, hi, shift)
        if reshifts < 4 and change < 1e-3 * (1.0 + abs(mu)):
            lo, _ = _collatz_wielandt(Bx, x)
            new_shift = lo - 1e-2 * (1.0 + abs(lo))
            if np.isfinite(lo) and new_shift > shift + 1e-3 * (1.0 + abs(shift)):
                shift = new_shift
                lu = _lu(B - shift * I)
                reshifts += 1
        mu_old = mu
    raise SolverError(
        f"inverse iteration did not converge in {max_iter} steps "
        f"(last mu={mu_old:.12g}, residual={residual:.3e})"
    )
