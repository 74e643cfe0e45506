"""Discrete zero-boundary Gaussian fields and their local operations.

Sampling routes:
  * unit square: exact spectral sampling in the sine eigenbasis (DST-I).
  * unit disk / upper disk: spectral sample on an enclosing square, then
    subtraction of the discrete harmonic extension of the values on the
    Dirichlet ring. The lattice Markov decomposition makes this exact in
    distribution.
  * mixed upper disk: even reflection of a full-disk sample,
    h(x, y) = (h0(x, y) + h0(x, -y)) / sqrt(2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
import scipy.signal as ssig
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domains import (
    BoundaryCondition,
    DomainSpec,
    Shape,
    bilinear_sample,
)
from .errors import DomainError, PreconditionError, ShapeError
from .greens import GREEN_NORMALIZATION, lattice_solver, lattice_system
from .rngs import STREAM_FIELD, rng_for


@dataclass
class FieldGrid:
    """Node values of a (generalized) Gaussian field on a lattice domain."""

    domain: DomainSpec
    values: np.ndarray  # full node grid; zero at Dirichlet/exterior nodes
    gamma_context: float | None = None
    seed_info: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != self.domain.node_shape:
            raise ShapeError(
                f"values shape {self.values.shape} != node grid {self.domain.node_shape}"
            )

    def sample_at(self, x, y) -> np.ndarray:
        return bilinear_sample(self.values, self.domain, x, y)

    def shifted(self, c: float) -> "FieldGrid":
        """Field plus a constant on the non-Dirichlet nodes."""
        vals = self.values.copy()
        mask = self.domain.interior_mask()
        vals[mask] += c
        return FieldGrid(self.domain, vals, self.gamma_context, dict(self.seed_info))

    def plus(self, other: "FieldGrid") -> "FieldGrid":
        if other.domain != self.domain:
            raise ShapeError("fields live on different domains")
        return FieldGrid(self.domain, self.values + other.values, self.gamma_context)


def constant_field(domain: DomainSpec, c: float) -> FieldGrid:
    vals = np.zeros(domain.node_shape)
    vals[domain.interior_mask()] = c
    return FieldGrid(domain, vals)


# --------------------------------------------------------------------------
# sampling


def _sample_square_interior(n_nodes_x: int, n_nodes_y: int, rng) -> np.ndarray:
    """Interior values of a zero-boundary field on an (nx+1) x (ny+1) node
    rectangle with covariance 2*pi*L^-1, via the orthonormal DST-I basis."""
    jx = np.arange(1, n_nodes_x)
    jy = np.arange(1, n_nodes_y)
    lam = (
        4.0
        - 2.0 * np.cos(np.pi * jx / n_nodes_x)[:, None]
        - 2.0 * np.cos(np.pi * jy / n_nodes_y)[None, :]
    )
    alpha = rng.standard_normal((n_nodes_x - 1, n_nodes_y - 1))
    coeff = alpha * np.sqrt(GREEN_NORMALIZATION / lam)
    return sfft.dstn(coeff, type=1, norm="ortho")


def _embed_margin(n: int) -> int:
    return max(2, n // 4)


def _sample_masked_domain(domain: DomainSpec, rng) -> np.ndarray:
    """Sample on an enclosing square and apply the harmonic correction."""
    n = domain.resolution
    m = _embed_margin(n)
    nx, ny = domain.node_shape
    # embedding square: domain grid plus an m-node margin on each side
    ex, ey = nx - 1 + 2 * m, ny - 1 + 2 * m
    big = np.zeros((ex + 1, ey + 1))
    big[1:ex, 1:ey] = _sample_square_interior(ex, ey, rng)
    window = big[m : m + nx, m : m + ny]

    mask = domain.interior_mask()
    ring_vals = np.where(mask, 0.0, window)
    rhs_grid = np.zeros_like(window)
    rhs_grid[1:-1, 1:-1] = (
        ring_vals[2:, 1:-1]
        + ring_vals[:-2, 1:-1]
        + ring_vals[1:-1, 2:]
        + ring_vals[1:-1, :-2]
    )
    solver = lattice_solver(domain)
    harm = solver.solve(rhs_grid[mask])
    out = np.zeros_like(window)
    out[mask] = window[mask] - harm
    return out


def sample_gff(domain: DomainSpec, seed: int) -> FieldGrid:
    """One replicate of the discrete zero-boundary field.

    Deterministic in (domain, seed); distinct seeds give independent
    replicates (counter-based streams).
    """
    rng = rng_for(seed, 0, STREAM_FIELD)
    if domain.shape is Shape.UNIT_SQUARE:
        n = domain.resolution
        vals = np.zeros(domain.node_shape)
        vals[1:n, 1:n] = _sample_square_interior(n, n, rng)
    elif domain.boundary_condition is BoundaryCondition.MIXED:
        n = domain.resolution
        disk = DomainSpec(Shape.UNIT_DISK, n)
        h0 = _sample_masked_domain(disk, rng)
        upper = h0[:, n:]
        lower = h0[:, n::-1]
        vals = (upper + lower) / math.sqrt(2.0)
    else:
        vals = _sample_masked_domain(domain, rng)
    return FieldGrid(domain, vals, seed_info={"seed": int(seed), "stream": STREAM_FIELD})


# --------------------------------------------------------------------------
# circle averages


def circle_point_count(eps: float, n: int) -> int:
    return max(16, int(math.ceil(2.0 * math.pi * eps * n)))


def circle_points(center, eps: float, n: int):
    m = circle_point_count(eps, n)
    th = 2.0 * np.pi * np.arange(m) / m
    return center[0] + eps * np.cos(th), center[1] + eps * np.sin(th)


def circle_average(field: FieldGrid, center, eps: float, truncate: bool = False) -> float:
    """Average of bilinearly interpolated values over M circle points.

    With ``truncate=True`` points outside the closed domain are dropped
    (boundary cells); otherwise the circle must stay inside the domain.
    """
    dom = field.domain
    if eps < 2.0 * dom.spacing:
        raise PreconditionError(f"eps={eps} below two lattice spacings")
    px, py = circle_points(center, eps, dom.resolution)
    inside = dom.contains(px, py, closed=True)
    if truncate:
        if not inside.any():
            raise DomainError("circle entirely outside the domain")
        px, py = px[inside], py[inside]
        return _weighted_point_average(field, px, py)
    if not inside.all():
        raise DomainError("circle exits the domain")
    return float(np.mean(field.sample_at(px, py)))


def _weighted_point_average(field: FieldGrid, px, py) -> float:
    """Point average normalized by the interpolated interior weight.

    Matches the truncated convolution path of :func:`circle_average_cells`,
    and keeps constant shifts exact next to the boundary.
    """
    dom = field.domain
    ind = dom.interior_mask().astype(float)
    num = float(np.sum(field.sample_at(px, py)))
    den = float(np.sum(bilinear_sample(ind, dom, px, py)))
    if den <= 1e-9:
        raise DomainError("no interior weight under the averaging points")
    return num / den


@lru_cache(maxsize=64)
def _circle_kernel(eps: float, n: int):
    """Bilinear circle-average stencil for cell centers.

    Returns (K, umin, vmin): node-offset weights relative to a cell's
    lower-left node, normalized to total weight 1.
    """
    m = circle_point_count(eps, n)
    th = 2.0 * np.pi * np.arange(m) / m
    fx = 0.5 + eps * n * np.cos(th)
    fy = 0.5 + eps * n * np.sin(th)
    i0 = np.floor(fx).astype(np.int64)
    j0 = np.floor(fy).astype(np.int64)
    tx, ty = fx - i0, fy - j0
    umin, umax = int(i0.min()), int(i0.max()) + 1
    vmin, vmax = int(j0.min()), int(j0.max()) + 1
    K = np.zeros((umax - umin + 1, vmax - vmin + 1))
    for di, dj, wt in (
        (0, 0, (1 - tx) * (1 - ty)),
        (1, 0, tx * (1 - ty)),
        (0, 1, (1 - tx) * ty),
        (1, 1, tx * ty),
    ):
        np.add.at(K, (i0 + di - umin, j0 + dj - vmin), wt / m)
    K.setflags(write=False)
    return K, umin, vmin


def _stencil_apply(values: np.ndarray, K: np.ndarray, umin: int, vmin: int, out_shape):
    """R[i, j] = sum_{u, v} K[u, v] * values[i + umin + u, j + vmin + v],
    zero-padded outside the array."""
    full = ssig.fftconvolve(values, K[::-1, ::-1], mode="full")
    i0 = umin + K.shape[0] - 1
    j0 = vmin + K.shape[1] - 1
    return full[i0 : i0 + out_shape[0], j0 : j0 + out_shape[1]]


def circle_average_cells(field: FieldGrid, eps: float) -> np.ndarray:
    """Circle average at every cell center, truncated to the domain.

    Computed as a single stencil convolution; for cells whose circle stays
    inside the domain this matches :func:`circle_average` pointwise.
    """
    dom = field.domain
    if eps < 2.0 * dom.spacing:
        raise PreconditionError(f"eps={eps} below two lattice spacings")
    K, umin, vmin = _circle_kernel(eps, dom.resolution)
    cs = dom.cell_shape
    num = _stencil_apply(field.values, K, umin, vmin, cs)
    den = _stencil_apply(dom.interior_mask().astype(float), K, umin, vmin, cs)
    out = np.zeros(cs)
    ok = den > 1e-9
    out[ok] = num[ok] / den[ok]
    return out


def semicircle_average(field: FieldGrid, x: float, eps: float) -> float:
    """Upper semicircle average centered on the diameter (mixed domain)."""
    dom = field.domain
    if dom.boundary_condition is not BoundaryCondition.MIXED:
        raise DomainError("semicircle averages require the mixed upper disk")
    if eps < 2.0 * dom.spacing:
        raise PreconditionError(f"eps={eps} below two lattice spacings")
    m = max(16, int(math.ceil(math.pi * eps * dom.resolution)))
    th = np.pi * (np.arange(m) + 0.5) / m
    px = x + eps * np.cos(th)
    py = eps * np.sin(th)
    keep = px * px + py * py < 1.0
    if not keep.any():
        raise DomainError("semicircle entirely outside the domain")
    return _weighted_point_average(field, px[keep], py[keep])


def semicircle_average_bins(field: FieldGrid, xs: np.ndarray, eps: float) -> np.ndarray:
    """Vectorized :func:`semicircle_average` for many diameter points."""
    dom = field.domain
    if dom.boundary_condition is not BoundaryCondition.MIXED:
        raise DomainError("semicircle averages require the mixed upper disk")
    if eps < 2.0 * dom.spacing:
        raise PreconditionError(f"eps={eps} below two lattice spacings")
    m = max(16, int(math.ceil(math.pi * eps * dom.resolution)))
    th = np.pi * (np.arange(m) + 0.5) / m
    px = xs[:, None] + eps * np.cos(th)[None, :]
    py = np.broadcast_to(eps * np.sin(th)[None, :], px.shape)
    keep = px * px + py * py < 1.0
    bin_idx, _ = np.nonzero(keep)
    fx, fy = px[keep], py[keep]
    ind = dom.interior_mask().astype(float)
    vals = field.sample_at(fx, fy)
    wts = bilinear_sample(ind, dom, fx, fy)
    num = np.bincount(bin_idx, weights=vals, minlength=len(xs))
    den = np.bincount(bin_idx, weights=wts, minlength=len(xs))
    if np.any(den <= 1e-9):
        raise DomainError("a bin has no interior weight under its semicircle")
    return num / den


# --------------------------------------------------------------------------
# Dirichlet inner product, Markov decomposition


def dirichlet_inner(f: FieldGrid, g: FieldGrid) -> float:
    """(1/2pi) * sum over lattice edges of gradient products times cell area.

    In two dimensions the lattice spacing cancels, so this is just the sum
    of finite-difference products over edges.
    """
    if f.domain != g.domain:
        raise ShapeError("fields live on different domains")
    dfx = np.diff(f.values, axis=0)
    dgx = np.diff(g.values, axis=0)
    dfy = np.diff(f.values, axis=1)
    dgy = np.diff(g.values, axis=1)
    return float((np.sum(dfx * dgx) + np.sum(dfy * dgy)) / GREEN_NORMALIZATION)


def _check_ball_inside(dom: DomainSpec, center, radius: float):
    cx, cy = center
    if dom.shape is Shape.UNIT_SQUARE:
        if not (radius < cx < 1 - radius and radius < cy < 1 - radius):
            raise DomainError("ball not strictly inside the unit square")
    elif dom.shape is Shape.UNIT_DISK:
        if math.hypot(cx, cy) + radius >= 1.0:
            raise DomainError("ball not strictly inside the unit disk")
    else:
        if math.hypot(cx, cy) + radius >= 1.0 or cy - radius <= 0.0:
            raise DomainError("ball not strictly inside the upper disk")


@lru_cache(maxsize=32)
def _ball_solver(domain: DomainSpec, center: tuple, radius: float):
    X, Y = domain.node_coords()
    ball = domain.interior_mask() & (
        (X - center[0]) ** 2 + (Y - center[1]) ** 2 < radius**2
    )
    if not ball.any():
        raise PreconditionError("ball contains no lattice nodes")
    index = -np.ones(ball.shape, dtype=np.int64)
    index[ball] = np.arange(ball.sum())
    I, J = np.nonzero(ball)
    rows, cols, vals = [], [], []
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = ball[I + di, J + dj]
        rows.append(index[I[nb], J[nb]])
        cols.append(index[I[nb] + di, J[nb] + dj])
        vals.append(-np.ones(int(nb.sum())))
    rows.append(index[I, J])
    cols.append(index[I, J])
    vals.append(4.0 * np.ones(len(I)))
    L = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(I), len(I)),
    )
    ball.setflags(write=False)
    return ball, spla.splu(L)


def harmonic_decompose(field: FieldGrid, center, radius: float):
    """Split the field into (support part, harmonic part) for a ball.

    The harmonic part solves the discrete Dirichlet problem in the ball
    with the field as boundary data and equals the field outside; the
    support part is the difference (zero outside the ball).
    """
    dom = field.domain
    if dom.boundary_condition is BoundaryCondition.MIXED:
        raise DomainError("harmonic decomposition implemented for Dirichlet domains")
    _check_ball_inside(dom, center, radius)
    ball, lu = _ball_solver(dom, (float(center[0]), float(center[1])), float(radius))
    outside_vals = np.where(ball, 0.0, field.values)
    rhs_grid = np.zeros_like(field.values)
    rhs_grid[1:-1, 1:-1] = (
        outside_vals[2:, 1:-1]
        + outside_vals[:-2, 1:-1]
        + outside_vals[1:-1, 2:]
        + outside_vals[1:-1, :-2]
    )
    u = lu.solve(rhs_grid[ball])
    harm_vals = field.values.copy()
    harm_vals[ball] = u
    supp_vals = np.zeros_like(field.values)
    supp_vals[ball] = field.values[ball] - u
    return (
        FieldGrid(dom, supp_vals, field.gamma_context),
        FieldGrid(dom, harm_vals, field.gamma_context),
    )


def harmonic_oscillation(field: FieldGrid, center, radius: float, eps: float) -> float:
    """Max minus min of the ball-harmonic part over the eps-ball."""
    if eps >= radius / 4.0:
        raise PreconditionError("eps must be below radius/4")
    _, harm = harmonic_decompose(field, center, radius)
    X, Y = field.domain.node_coords()
    near = (X - center[0]) ** 2 + (Y - center[1]) ** 2 <= eps**2
    vals = [float(harm.sample_at(center[0], center[1]))]
    if near.any():
        vals.extend(harm.values[near].tolist())
    return float(max(vals) - min(vals))
