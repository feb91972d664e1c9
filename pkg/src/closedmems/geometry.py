"""Domains, uniform grids and boundary-distance fields.

Three domain kinds are supported: the interval ``(0, L)``, the rectangle
``(0, L1) x (0, L2)`` and the disk of radius ``R`` centred at the origin.
A :class:`Grid` stores only the interior nodes; Dirichlet nodes are
implicit (``u = 0`` there).  For the disk, stencil legs that leave the
domain are cut at the circle and the cut length is kept as a fraction of
``h`` (Shortley-Weller).

Fields on a grid are plain 1-D ``numpy`` arrays with one entry per interior
node, in the order of :attr:`Grid.coords`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainKind",
    "Domain",
    "Grid",
    "ScalarField",
    "build_grid",
    "boundary_distance",
    "varrho_tau",
    "varrho_from_rho",
    "MIN_NODES",
]

#: One value per interior node.
ScalarField = np.ndarray

#: Smallest admissible number of cells per axis.
MIN_NODES = 4

RHO_CAP = 0.5


class DomainKind(str, enum.Enum):
    INTERVAL = "interval"
    RECTANGLE = "rectangle"
    DISK = "disk"


@dataclass(frozen=True)
class Domain:
    """A bounded domain.

    ``extents`` is ``(L,)`` for an interval, ``(L1, L2)`` for a rectangle and
    ``(R,)`` for a disk.
    """

    kind: DomainKind
    extents: tuple[float, ...]

    def __post_init__(self):
        kind = DomainKind(self.kind)
        object.__setattr__(self, "kind", kind)
        ext = tuple(float(e) for e in self.extents)
        object.__setattr__(self, "extents", ext)
        want = 2 if kind is DomainKind.RECTANGLE else 1
        if len(ext) != want:
            raise ValueError(f"{kind.value} takes {want} extent(s), got {len(ext)}")
        if not all(np.isfinite(e) and e > 0 for e in ext):
            raise ValueError(f"degenerate extents {ext}: all must be finite and > 0")

    @classmethod
    def interval(cls, length: float = 1.0) -> "Domain":
        return cls(DomainKind.INTERVAL, (length,))

    @classmethod
    def rectangle(cls, l1: float = 1.0, l2: float = 1.0) -> "Domain":
        return cls(DomainKind.RECTANGLE, (l1, l2))

    @classmethod
    def disk(cls, radius: float = 1.0) -> "Domain":
        return cls(DomainKind.DISK, (radius,))

    @property
    def dim(self) -> int:
        return 1 if self.kind is DomainKind.INTERVAL else 2

    def describe(self) -> str:
        return " ".join([self.kind.value] + [repr(e) for e in self.extents])


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid over the interior nodes of a domain.

    Attributes
    ----------
    domain : Domain
    n : int
        Cells per axis (for the disk: across the bounding box ``[-R, R]``).
    h : float
        Mesh spacing.
    coords : ndarray, shape (M, dim)
        Interior node coordinates.
    neighbors : ndarray of int, shape (M, 2*dim)
        Stencil neighbours ordered ``(-x, +x[, -y, +y])``; ``-1`` marks a
        Dirichlet (boundary) neighbour.
    fractions : ndarray, shape (M, 2*dim)
        Leg length divided by ``h``; 1 except on Shortley-Weller legs of the
        disk, where it is the exact distance to the circle, in ``(0, 1]``.
    index : ndarray of int or None
        For tensor grids, ``index[i, j]`` is the node number of the node
        with axis indices ``(i, j)``; ``None`` for the disk.
    """

    domain: Domain
    n: int
    h: float
    coords: np.ndarray
    neighbors: np.ndarray
    fractions: np.ndarray
    index: np.ndarray | None = field(default=None)

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def cell_volume(self) -> float:
        """Quadrature weight of one node (``h**dim``)."""
        return self.h ** self.dim

    @property
    def boundary_adjacent(self) -> np.ndarray:
        """Mask of nodes with at least one Dirichlet neighbour."""
        return (self.neighbors < 0).any(axis=1)

    @property
    def shortley_weller(self) -> np.ndarray:
        """Mask of nodes with at least one cut (fraction < 1) leg."""
        return (self.fractions < 1.0).any(axis=1)

    def integrate(self, values: np.ndarray) -> float:
        """Nodal-sum quadrature over the interior nodes."""
        return float(np.sum(values) * self.cell_volume)

    def mirror_permutations(self) -> list[np.ndarray]:
        """Node permutations realising the reflection symmetries of the domain."""
        if self.index is None:
            R = self.domain.extents[0]
            lattice = np.rint((self.coords + R) / self.h).astype(np.int64)
            key = {tuple(c): k for k, c in enumerate(lattice)}
            perms = []
            for axis in range(2):
                flip = lattice.copy()
                flip[:, axis] = self.n - flip[:, axis]
                perms.append(np.array([key[tuple(c)] for c in flip]))
            return perms
        perms = []
        for axis in range(self.index.ndim):
            perms.append(np.flip(self.index, axis=axis).ravel())
        return perms


def _tensor_grid(domain: Domain, n: int) -> Grid:
    lengths = domain.extents
    dim = domain.dim
    # Equal spacing on every axis: rectangles need commensurate sides.
    h = lengths[0] / n
    counts = []
    for L in lengths:
        m = L / h
        if abs(m - round(m)) > 1e-9 * m:
            raise ValueError(f"extents {lengths} are not commensurate with h = {h!r}")
        counts.append(int(round(m)) - 1)
    axes = [h * np.arange(1, c + 1) for c in counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    index = np.arange(coords.shape[0]).reshape(counts)

    neighbors = np.full((coords.shape[0], 2 * dim), -1, dtype=np.int64)
    for ax in range(dim):
        lo = [slice(None)] * dim
        hi = [slice(None)] * dim
        lo[ax] = slice(1, None)
        hi[ax] = slice(None, -1)
        # node at position i gets -ax neighbour i-1 and +ax neighbour i+1
        neighbors[index[tuple(lo)].ravel(), 2 * ax] = index[tuple(hi)].ravel()
        neighbors[index[tuple(hi)].ravel(), 2 * ax + 1] = index[tuple(lo)].ravel()
    fractions = np.ones_like(neighbors, dtype=float)
    return Grid(domain, n, h, coords, neighbors, fractions, index)


def _disk_grid(domain: Domain, n: int) -> Grid:
    R = domain.extents[0]
    h = 2.0 * R / n
    ticks = -R + h * np.arange(1, n)
    X, Y = np.meshgrid(ticks, ticks, indexing="ij")
    # Nodes within 1e-9 h of the circle count as boundary nodes; this keeps
    # every cut fraction bounded away from zero.
    inside = np.hypot(X, Y) < R - 1e-9 * h
    number = np.full(X.shape, -1, dtype=np.int64)
    number[inside] = np.arange(inside.sum())
    ii, jj = np.nonzero(inside)
    coords = np.stack([X[ii, jj], Y[ii, jj]], axis=1)

    M = coords.shape[0]
    neighbors = np.full((M, 4), -1, dtype=np.int64)
    fractions = np.ones((M, 4))
    steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    for leg, (di, dj) in enumerate(steps):
        ni, nj = ii + di, jj + dj
        ok = (ni >= 0) & (ni < n - 1) & (nj >= 0) & (nj < n - 1)
        nb = np.full(M, -1, dtype=np.int64)
        nb[ok] = number[ni[ok], nj[ok]]
        neighbors[:, leg] = nb
        cut = nb < 0
        x, y = coords[cut, 0], coords[cut, 1]
        if leg < 2:
            along, across, sign = x, y, (-1.0, 1.0)[leg]
        else:
            along, across, sign = y, x, (-1.0, 1.0)[leg - 2]
        # distance from the node to the circle along the leg direction
        t = np.sqrt(R * R - across * across) - sign * along
        fractions[cut, leg] = np.clip(t / h, np.finfo(float).tiny, 1.0)
    return Grid(domain, n, h, coords, neighbors, fractions, None)


def build_grid(domain: Domain, n: int) -> Grid:
    """Uniform grid with ``n`` cells per axis.

    >>> g = build_grid(Domain.interval(1.0), 5)
    >>> g.h, g.coords.ravel().round(12).tolist()
    (0.2, [0.2, 0.4, 0.6, 0.8])
    """
    if int(n) != n or n < MIN_NODES:
        raise ValueError(f"n must be an integer >= {MIN_NODES}, got {n!r}")
    n = int(n)
    if domain.kind is DomainKind.DISK:
        return _disk_grid(domain, n)
    return _tensor_grid(domain, n)


def _raw_distance(grid: Grid) -> np.ndarray:
    d = grid.domain
    c = grid.coords
    if d.kind is DomainKind.DISK:
        return d.extents[0] - np.hypot(c[:, 0], c[:, 1])
    dist = np.full(grid.size, np.inf)
    for ax, L in enumerate(d.extents):
        dist = np.minimum(dist, np.minimum(c[:, ax], L - c[:, ax]))
    return dist


def boundary_distance(grid: Grid) -> ScalarField:
    """``rho = min(1/2, dist(x, boundary))`` at the interior nodes."""
    return np.minimum(RHO_CAP, _raw_distance(grid))


def varrho_from_rho(rho: np.ndarray, tau: float) -> np.ndarray:
    """Weight ``rho**min(1, tau)``, or ``rho*ln(1/rho)`` when ``tau == 1``."""
    if not 0.0 < tau < 2.0:
        raise ValueError(f"tau must lie in (0, 2), got {tau!r}")
    rho = np.asarray(rho, dtype=float)
    if tau == 1.0:
        return rho * np.log(1.0 / rho)
    return rho ** min(1.0, tau)


def varrho_tau(grid: Grid, tau: float) -> ScalarField:
    """The Green-estimate weight evaluated at the interior nodes of ``grid``."""
    return varrho_from_rho(boundary_distance(grid), tau)
