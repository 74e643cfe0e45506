"""Compactly supported radial smoothing kernels on the cell lattice."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import is_dyadic
from .errors import PreconditionError


def bump_profile(r: np.ndarray) -> np.ndarray:
    """exp(-1/(1-r^2)) on [0, 1), zero outside (unnormalized)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


@dataclass
class Kernel:
    """Lattice discretization of eta^eps, renormalized to unit mass.

    ``weights`` are per-cell (or per-bin) values of the scaled profile;
    sum(weights) * cell measure == 1 after renormalization.
    """

    eps: float
    dimension: int
    resolution: int
    weights: np.ndarray  # 2D: (2k+1, 2k+1) centered stencil; 1D: (2k+1,)

    @property
    def cell_measure(self) -> float:
        # 1D bins have width 2/n (diameter [-1, 1] split into n bins)
        return (1.0 / self.resolution) ** 2 if self.dimension == 2 else 2.0 / self.resolution

    def value_at(self, dx: np.ndarray, dy: np.ndarray | None = None) -> np.ndarray:
        """Kernel value at physical offsets, with the lattice normalization."""
        if self.dimension == 2:
            r = np.sqrt(np.asarray(dx) ** 2 + np.asarray(dy) ** 2) / self.eps
        else:
            r = np.abs(np.asarray(dx)) / self.eps
        return self._norm * bump_profile(r)

    def __post_init__(self):
        total = float(self.weights.sum()) * self.cell_measure
        if abs(total - 1.0) > 1e-10:
            raise PreconditionError("kernel weights are not normalized")
        # recover the scale factor mapping the raw profile to the weights
        center = self.weights[tuple(s // 2 for s in self.weights.shape)]
        self._norm = float(center) / float(bump_profile(np.zeros(1))[0])


def make_kernel(eps: float, dimension: int, resolution: int) -> Kernel:
    """Discretized bump kernel at dyadic scale eps on an n-lattice."""
    if dimension not in (1, 2):
        raise PreconditionError("dimension must be 1 or 2")
    if not is_dyadic(eps) or eps < 2.0 / resolution:
        raise PreconditionError(
            f"eps={eps} must be dyadic and at least 2/n (n={resolution})"
        )
    if dimension == 2:
        step = 1.0 / resolution
        k = int(math.ceil(eps / step)) + 1
        off = np.arange(-k, k + 1) * step
        r = np.sqrt(off[:, None] ** 2 + off[None, :] ** 2) / eps
        raw = bump_profile(r)
        cell = step**2
    else:
        step = 2.0 / resolution
        k = int(math.ceil(eps / step)) + 1
        off = np.arange(-k, k + 1) * step
        raw = bump_profile(np.abs(off) / eps)
        cell = step
    total = raw.sum() * cell
    if total <= 0:
        raise PreconditionError("kernel support resolves no lattice cells")
    return Kernel(eps=eps, dimension=dimension, resolution=resolution, weights=raw / total)
