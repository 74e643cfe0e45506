"""Lattice domains: unit square, unit disk, upper half disk.

All domains are discretized with spacing 1/n on a rectangular node grid.
Field values live on nodes; measures live on the cells between nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError


class Shape(str, Enum):
    UNIT_SQUARE = "square"
    UNIT_DISK = "disk"
    UPPER_UNIT_DISK = "upper-disk"


class BoundaryCondition(str, Enum):
    DIRICHLET = "dirichlet"
    MIXED = "mixed"  # Neumann on the diameter, Dirichlet on the arc


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def is_dyadic(eps: float) -> bool:
    """True if eps equals 2**-k exactly for some integer k >= 0."""
    if not (0 < eps <= 1):
        return False
    mant, _ = math.frexp(eps)
    return mant == 0.5 or eps == 1.0


@dataclass(frozen=True)
class DomainSpec:
    shape: Shape
    resolution: int
    boundary_condition: BoundaryCondition = BoundaryCondition.DIRICHLET

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        object.__setattr__(
            self, "boundary_condition", BoundaryCondition(self.boundary_condition)
        )
        n = self.resolution
        if not isinstance(n, (int, np.integer)) or n < 8 or not is_power_of_two(n):
            raise ConfigurationError(
                f"resolution must be a power of two >= 8, got {n!r}"
            )
        if (
            self.boundary_condition is BoundaryCondition.MIXED
            and self.shape is not Shape.UPPER_UNIT_DISK
        ):
            raise ConfigurationError(
                "mixed boundary condition is only valid on the upper unit disk"
            )

    # --- node grid geometry ------------------------------------------------

    @property
    def spacing(self) -> float:
        return 1.0 / self.resolution

    @property
    def origin_xy(self) -> tuple[float, float]:
        """Physical coordinates of node [0, 0]."""
        if self.shape is Shape.UNIT_SQUARE:
            return (0.0, 0.0)
        if self.shape is Shape.UNIT_DISK:
            return (-1.0, -1.0)
        return (-1.0, 0.0)  # upper unit disk

    @property
    def node_shape(self) -> tuple[int, int]:
        n = self.resolution
        if self.shape is Shape.UNIT_SQUARE:
            return (n + 1, n + 1)
        if self.shape is Shape.UNIT_DISK:
            return (2 * n + 1, 2 * n + 1)
        return (2 * n + 1, n + 1)

    @property
    def cell_shape(self) -> tuple[int, int]:
        nx, ny = self.node_shape
        return (nx - 1, ny - 1)

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        x0, y0 = self.origin_xy
        nx, ny = self.node_shape
        xs = x0 + np.arange(nx) / self.resolution
        ys = y0 + np.arange(ny) / self.resolution
        return np.meshgrid(xs, ys, indexing="ij")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x0, y0 = self.origin_xy
        cx, cy = self.cell_shape
        xs = x0 + (np.arange(cx) + 0.5) / self.resolution
        ys = y0 + (np.arange(cy) + 0.5) / self.resolution
        return np.meshgrid(xs, ys, indexing="ij")

    def interior_mask(self) -> np.ndarray:
        """Nodes where the field may be nonzero (Dirichlet nodes excluded).

        For the mixed upper disk this includes the diameter (free boundary).
        """
        return _interior_mask(self)

    def cell_mask(self) -> np.ndarray:
        """Cells whose center lies in the open domain."""
        return _cell_mask(self)

    def contains(self, x, y, closed: bool = False) -> np.ndarray:
        """Membership test for physical points (vectorized).

        With ``closed=True`` the closure is used; for the mixed upper disk
        the diameter always counts as inside (the field lives there).
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.shape is Shape.UNIT_SQUARE:
            if closed:
                return (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
            return (x > 0) & (x < 1) & (y > 0) & (y < 1)
        r2 = x * x + y * y
        in_disk = r2 <= 1.0 if closed else r2 < 1.0
        if self.shape is Shape.UNIT_DISK:
            return in_disk
        if self.boundary_condition is BoundaryCondition.MIXED:
            return in_disk & (y >= 0)
        return in_disk & (y > 0 if not closed else y >= 0)

    def to_frac_index(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Physical point -> fractional node index."""
        x0, y0 = self.origin_xy
        n = self.resolution
        return (np.asarray(x, dtype=float) - x0) * n, (np.asarray(y, dtype=float) - y0) * n


@lru_cache(maxsize=32)
def _interior_mask(domain: DomainSpec) -> np.ndarray:
    X, Y = domain.node_coords()
    n = domain.resolution
    if domain.shape is Shape.UNIT_SQUARE:
        mask = np.zeros(domain.node_shape, dtype=bool)
        mask[1:n, 1:n] = True
    elif domain.shape is Shape.UNIT_DISK:
        mask = X * X + Y * Y < 1.0
    else:
        in_disk = X * X + Y * Y < 1.0
        if domain.boundary_condition is BoundaryCondition.MIXED:
            mask = in_disk  # y >= 0 by grid construction; diameter is free
        else:
            mask = in_disk & (Y > 0)
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=32)
def _cell_mask(domain: DomainSpec) -> np.ndarray:
    CX, CY = domain.cell_centers()
    mask = domain.contains(CX, CY)
    mask.setflags(write=False)
    return mask


def bilinear_sample(values: np.ndarray, domain: DomainSpec, x, y) -> np.ndarray:
    """Bilinear interpolation of a node array at physical points."""
    fx, fy = domain.to_frac_index(x, y)
    nx, ny = values.shape
    if np.any(fx < 0) or np.any(fx > nx - 1) or np.any(fy < 0) or np.any(fy > ny - 1):
        from .errors import DomainError

        raise DomainError("sample point outside the node grid")
    i0 = np.minimum(np.floor(fx).astype(np.int64), nx - 2)
    j0 = np.minimum(np.floor(fy).astype(np.int64), ny - 2)
    tx = fx - i0
    ty = fy - j0
    return (
        values[i0, j0] * (1 - tx) * (1 - ty)
        + values[i0 + 1, j0] * tx * (1 - ty)
        + values[i0, j0 + 1] * (1 - tx) * ty
        + values[i0 + 1, j0 + 1] * tx * ty
    )
