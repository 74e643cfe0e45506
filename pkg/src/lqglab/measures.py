"""Quantum area and boundary length measures at a dyadic regularization scale.

mass(cell) = eps^(gamma^2/2) * exp(gamma * h_eps(center)) * area(cell)
mass(bin)  = eps^(gamma^2/4) * exp(gamma * h_eps(x)/2)   * length(bin)

where h_eps is the (semi)circle average of the field. Cells whose circle
exits the domain use the average over the retained arc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import BoundaryCondition, DomainSpec, is_dyadic
from .errors import ConfigurationError, ParameterError, PreconditionError
from .gff import FieldGrid, circle_average_cells, semicircle_average_bins


@dataclass
class CellMeasure:
    domain: DomainSpec
    eps: float
    gamma: float
    mass: np.ndarray  # per cell, zero outside the domain cell mask

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    def cell_centers(self):
        return self.domain.cell_centers()

    def scaled(self, factor: float) -> "CellMeasure":
        return CellMeasure(self.domain, self.eps, self.gamma, self.mass * factor)


@dataclass
class LineMeasure:
    """Mass per bin on the diameter [-1, 1], bins of width 2/n_bins."""

    n_bins: int
    eps: float
    gamma: float
    mass: np.ndarray

    @property
    def bin_length(self) -> float:
        return 2.0 / self.n_bins

    def bin_centers(self) -> np.ndarray:
        return -1.0 + (np.arange(self.n_bins) + 0.5) * self.bin_length

    def scaled(self, factor: float) -> "LineMeasure":
        return LineMeasure(self.n_bins, self.eps, self.gamma, self.mass * factor)


def _check_scale(eps: float, n: int):
    if not is_dyadic(eps):
        raise PreconditionError(f"eps={eps} is not dyadic")
    if eps < 2.0 / n:
        raise PreconditionError(f"eps={eps} below 2/n with n={n}")


def build_liouville_measure(field: FieldGrid, gamma: float, eps: float) -> CellMeasure:
    """Area measure of the field at scale eps."""
    if not (0.0 <= gamma < 2.0):
        raise ParameterError(f"gamma must be in [0, 2), got {gamma}")
    dom = field.domain
    if dom.boundary_condition is not BoundaryCondition.DIRICHLET:
        raise ConfigurationError("area measure requires a Dirichlet domain")
    _check_scale(eps, dom.resolution)
    h_eps = circle_average_cells(field, eps)
    mask = dom.cell_mask()
    mass = np.zeros(dom.cell_shape)
    if gamma == 0.0:
        mass[mask] = dom.cell_area
    else:
        mass[mask] = eps ** (gamma**2 / 2.0) * np.exp(gamma * h_eps[mask]) * dom.cell_area
    return CellMeasure(dom, eps, gamma, mass)


def build_boundary_measure(field: FieldGrid, gamma: float, eps: float) -> LineMeasure:
    """Boundary length measure on [-1, 1] from a mixed-boundary field."""
    if not (0.0 <= gamma < 2.0):
        raise ParameterError(f"gamma must be in [0, 2), got {gamma}")
    dom = field.domain
    if dom.boundary_condition is not BoundaryCondition.MIXED:
        raise ConfigurationError("boundary measure requires the mixed upper disk")
    _check_scale(eps, dom.resolution)
    n = dom.resolution
    centers = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    mass = np.empty(n)
    if gamma == 0.0:
        mass[:] = 2.0 / n
    else:
        h = semicircle_average_bins(field, centers, eps)
        mass[:] = eps ** (gamma**2 / 4.0) * np.exp(gamma * h / 2.0) * (2.0 / n)
    return LineMeasure(n, eps, gamma, mass)


def frostman_energy(measure, d: float, epsilon_reg: float) -> float:
    """Diagnostic double sum  sum_ab m_a m_b / max(|z_a-z_b|, reg)^(d-reg)."""
    if not (0.0 < d <= 2.0):
        raise ParameterError(f"d must be in (0, 2], got {d}")
    if epsilon_reg <= 0:
        raise ParameterError("epsilon_reg must be positive")
    expo = d - epsilon_reg
    if isinstance(measure, LineMeasure):
        pos = measure.bin_centers()[:, None]
        m = measure.mass
    else:
        CX, CY = measure.cell_centers()
        sel = measure.mass > 0
        pos = np.column_stack([CX[sel], CY[sel]])
        m = measure.mass[sel]
    total = 0.0
    block = 2048
    for lo in range(0, len(m), block):
        hi = min(lo + block, len(m))
        diff = pos[lo:hi, None, :] - pos[None, :, :]
        dist = np.maximum(np.sqrt((diff**2).sum(axis=2)), epsilon_reg)
        total += float(np.einsum("i,ij,j->", m[lo:hi], dist ** (-expo), m))
    return total
