"""Discrete Green's functions of the lattice Laplacian.

The zero-boundary field on a lattice domain has covariance 2*pi*L^-1,
where L is the graph Laplacian (degree 4) on interior nodes. The 2*pi
factor matches the Dirichlet inner product normalization, so that the
circle-average variance grows like log(1/eps) + log R(z; D).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domains import DomainSpec, Shape, BoundaryCondition, bilinear_sample
from .errors import ConfigurationError, DomainError

GREEN_NORMALIZATION = 2.0 * np.pi

# above this many unknowns, switch from a direct factorization to AMG
_SPLU_MAX_NODES = 80_000

_NEIGHBOR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@lru_cache(maxsize=16)
def lattice_system(domain: DomainSpec):
    """Graph Laplacian on interior nodes plus the node index grid.

    Returns (L, index_grid) where index_grid maps node (i, j) to its row
    in L, or -1 for Dirichlet/exterior nodes. Every interior node has
    degree 4; edges to Dirichlet nodes are kept (value pinned at zero).
    """
    if (
        domain.shape is Shape.UPPER_UNIT_DISK
        and domain.boundary_condition is BoundaryCondition.MIXED
    ):
        raise ConfigurationError(
            "the mixed-boundary Laplacian is handled by reflection onto the full disk"
        )
    mask = domain.interior_mask()
    index = -np.ones(mask.shape, dtype=np.int64)
    index[mask] = np.arange(mask.sum())
    I, J = np.nonzero(mask)
    rows, cols, vals = [], [], []
    for di, dj in _NEIGHBOR_OFFSETS:
        I2, J2 = I + di, J + dj
        ok = (
            (I2 >= 0)
            & (I2 < mask.shape[0])
            & (J2 >= 0)
            & (J2 < mask.shape[1])
        )
        nb = np.zeros(len(I), dtype=bool)
        nb[ok] = mask[I2[ok], J2[ok]]
        rows.append(index[I[nb], J[nb]])
        cols.append(index[I2[nb], J2[nb]])
        vals.append(-np.ones(int(nb.sum())))
    rows.append(index[I, J])
    cols.append(index[I, J])
    vals.append(4.0 * np.ones(len(I)))
    L = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(I), len(I)),
    )
    return L, index


class LatticeSolver:
    """Solves L x = b, choosing splu or AMG by problem size."""

    def __init__(self, L: sp.csr_matrix):
        self.L = L
        self.n = L.shape[0]
        if self.n <= _SPLU_MAX_NODES:
            self._lu = spla.splu(L.tocsc())
            self._ml = None
        else:
            import pyamg

            self._lu = None
            self._ml = pyamg.ruge_stuben_solver(L)

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            return self._lu.solve(b)
        return self._ml.solve(b, tol=1e-12, accel="cg", maxiter=400)


@lru_cache(maxsize=8)
def lattice_solver(domain: DomainSpec) -> LatticeSolver:
    L, _ = lattice_system(domain)
    return LatticeSolver(L)


class GreenTable:
    """Accessor for G(x, y) = 2*pi * L^-1 on lattice nodes.

    Entries involving a Dirichlet boundary (or exterior) node are zero.
    For the mixed upper disk, values are obtained from the full disk by
    reflection: G_mixed(a, b) = G_disk(a, b) + G_disk(a, conj(b)).
    """

    def __init__(self, domain: DomainSpec):
        self.domain = domain
        self._mixed = (
            domain.boundary_condition is BoundaryCondition.MIXED
        )
        if self._mixed:
            base = DomainSpec(Shape.UNIT_DISK, domain.resolution)
            self._base = GreenTable(base)
        else:
            self._base = None
            self._L, self._index = lattice_system(domain)
            self._solver = lattice_solver(domain)
            self._dense = None
            self._col_cache: dict[tuple[int, int], np.ndarray] = {}

    # node arguments are integer (i, j) indices into the domain node grid

    def column(self, node: tuple[int, int]) -> np.ndarray:
        """G(node, .) as a full node-grid array."""
        if self._mixed:
            i, j = node
            # reflect upper-grid node onto the full disk grid
            n = self.domain.resolution
            up = self._base.column((i, j + n))
            down = self._base.column((i, n - j))
            full = up + down
            return full[:, n:]
        i, j = node
        k = int(self._index[i, j])
        out = np.zeros(self.domain.node_shape)
        if k < 0:
            return out
        key = (i, j)
        if key not in self._col_cache:
            e = np.zeros(self._L.shape[0])
            e[k] = 1.0
            col = GREEN_NORMALIZATION * self._solver.solve(e)
            if len(self._col_cache) < 64:
                self._col_cache[key] = col
            else:
                out[self.domain.interior_mask()] = col
                return out
        out[self.domain.interior_mask()] = self._col_cache[key]
        return out

    def value(self, a: tuple[int, int], b: tuple[int, int]) -> float:
        # evaluate from the lexicographically smaller node's column so that
        # G(a, b) == G(b, a) exactly, independent of solver round-off
        a, b = (a, b) if tuple(a) <= tuple(b) else (b, a)
        col = self.column(a)
        return float(col[b[0], b[1]])

    def dense(self) -> np.ndarray:
        """Full matrix on interior nodes; small domains only."""
        if self._mixed:
            raise ConfigurationError("dense table not provided for the mixed domain")
        if self._dense is None:
            n = self._L.shape[0]
            if n > 6000:
                raise ConfigurationError(
                    f"dense Green table refused for {n} nodes (memory)"
                )
            self._dense = GREEN_NORMALIZATION * np.linalg.inv(self._L.toarray())
        return self._dense

    def quadratic_form(self, weights: np.ndarray) -> float:
        """2*pi * w^T L^-1 w for a node-grid weight array.

        Weights on Dirichlet/exterior nodes are ignored (field is zero there).
        """
        if self._mixed:
            raise ConfigurationError("use circle variance helpers on the mixed domain")
        w = weights[self.domain.interior_mask()]
        x = self._solver.solve(w)
        return GREEN_NORMALIZATION * float(w @ x)

    def circle_average_weights(self, center, eps: float) -> np.ndarray:
        """Node weights of the M-point bilinear circle average."""
        from .gff import circle_points

        px, py = circle_points(center, eps, self.domain.resolution)
        return self._point_weights(px, py)

    def _point_weights(self, px, py) -> np.ndarray:
        fx, fy = self.domain.to_frac_index(px, py)
        nx, ny = self.domain.node_shape
        if np.any(fx < 0) or np.any(fx > nx - 1) or np.any(fy < 0) or np.any(fy > ny - 1):
            raise DomainError("circle leaves the node grid")
        i0 = np.minimum(np.floor(fx).astype(np.int64), nx - 2)
        j0 = np.minimum(np.floor(fy).astype(np.int64), ny - 2)
        tx = fx - i0
        ty = fy - j0
        w = np.zeros(self.domain.node_shape)
        m = len(px)
        for di, dj, wt in (
            (0, 0, (1 - tx) * (1 - ty)),
            (1, 0, tx * (1 - ty)),
            (0, 1, (1 - tx) * ty),
            (1, 1, tx * ty),
        ):
            np.add.at(w, (i0 + di, j0 + dj), wt / m)
        return w

    def circle_average_variance(self, center, eps: float) -> float:
        """Exact Var of the discrete circle average at the given center."""
        w = self.circle_average_weights(center, eps)
        if self._mixed:
            # reflect weights onto the full disk and halve the amplitude
            n = self.domain.resolution
            full = np.zeros(self._base.domain.node_shape)
            full[:, n:] += w / np.sqrt(2.0)
            full[:, : n + 1] += w[:, ::-1] / np.sqrt(2.0)
            return self._base.quadratic_form(full)
        return self.quadratic_form(w)


@lru_cache(maxsize=8)
def green_table(domain: DomainSpec) -> GreenTable:
    """Shared Green table per domain (immutable after construction)."""
    return GreenTable(domain)
