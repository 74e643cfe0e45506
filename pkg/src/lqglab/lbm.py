"""Brownian paths, the quantum clock, and harmonic measure off the range.

The quantum clock is the additive functional
    phi(t_k) = eps^(gamma^2/2) * sum_{j<k} exp(gamma * h_eps(B_j)) * dt_j
(left-endpoint rule); composing B with its inverse gives the
time-changed diffusion. Harmonic measure viewed from z is estimated by
walk-on-spheres with a capture tube of radius 2/n around the range.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.ndimage as ndi
from scipy.spatial import cKDTree

from ._kernels import wos_advance
from .domains import DomainSpec
from .errors import ConfigurationError, DomainError, ParameterError, PreconditionError
from .gff import FieldGrid, circle_average, circle_average_cells
from .rngs import STREAM_PATH, STREAM_WALKERS, rng_for

log = logging.getLogger(__name__)

_PATH_CHUNK = 16384


@dataclass
class BrownianPath:
    times: np.ndarray  # (k+1,), last entry is the stopping time
    positions: np.ndarray  # (k+1, 2), last entry on the stopping circle
    dt: float
    stop_radius: float
    domain_radius: float
    exit_flag: str  # "inner" (hit the subdomain boundary) or "outer"
    seed_info: dict = dc_field(default_factory=dict)

    @property
    def exit_time(self) -> float:
        return float(self.times[-1])


def sample_brownian_path(
    dt: float,
    seed: int,
    stop_radius: float = 0.5,
    domain_radius: float = 1.0,
    resolution: int | None = None,
    max_steps: int = 50_000_000,
) -> BrownianPath:
    """Brownian motion from the origin, stopped on |B| = stop_radius.

    Gaussian increments with variance dt per coordinate; the boundary
    overshoot is resolved by linear interpolation onto the stopping circle.
    """
    if resolution is not None and dt > (1.0 / resolution) ** 2:
        raise PreconditionError(f"dt={dt} too coarse for resolution {resolution}")
    if not (0 < stop_radius < domain_radius):
        raise ConfigurationError("need 0 < stop_radius < domain_radius")
    rng = rng_for(seed, 0, STREAM_PATH)
    sd = math.sqrt(dt)
    chunks = [np.zeros((1, 2))]
    pos = np.zeros(2)
    total = 0
    r2max = stop_radius**2
    while total < max_steps:
        inc = rng.standard_normal((_PATH_CHUNK, 2)) * sd
        pts = pos + np.cumsum(inc, axis=0)
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        hit = r2 >= r2max
        if hit.any():
            k = int(np.argmax(hit))
            chunks.append(pts[: k + 1])
            total += k + 1
            break
        chunks.append(pts)
        pos = pts[-1]
        total += _PATH_CHUNK
    else:
        raise PreconditionError("path did not exit within max_steps")
    positions = np.concatenate(chunks)
    # interpolate the final overshooting step onto the circle
    p0, p1 = positions[-2], positions[-1]
    d = p1 - p0
    a = float(d @ d)
    b = 2.0 * float(p0 @ d)
    c = float(p0 @ p0) - r2max
    s = (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)
    positions[-1] = p0 + s * d
    times = np.arange(len(positions), dtype=float) * dt
    times[-1] = (len(positions) - 2 + s) * dt
    return BrownianPath(
        times=times,
        positions=positions,
        dt=dt,
        stop_radius=stop_radius,
        domain_radius=domain_radius,
        exit_flag="inner",
        seed_info={"seed": int(seed), "stream": STREAM_PATH},
    )


@dataclass
class QuantumClock:
    phi: np.ndarray  # per path timestamp, phi[0] = 0, nondecreasing
    eps: float
    gamma: float
    path_len: int

    def increments(self) -> np.ndarray:
        return np.diff(self.phi)

    @property
    def total(self) -> float:
        return float(self.phi[-1])


def cell_grid_sample(cells: np.ndarray, domain: DomainSpec, x, y) -> np.ndarray:
    """Bilinear sample of a cell-center array at physical points."""
    x0, y0 = domain.origin_xy
    n = domain.resolution
    fx = (np.asarray(x, dtype=float) - x0) * n - 0.5
    fy = (np.asarray(y, dtype=float) - y0) * n - 0.5
    nx, ny = cells.shape
    fx = np.clip(fx, 0, nx - 1)
    fy = np.clip(fy, 0, ny - 1)
    i0 = np.minimum(np.floor(fx).astype(np.int64), nx - 2)
    j0 = np.minimum(np.floor(fy).astype(np.int64), ny - 2)
    tx, ty = fx - i0, fy - j0
    return (
        cells[i0, j0] * (1 - tx) * (1 - ty)
        + cells[i0 + 1, j0] * tx * (1 - ty)
        + cells[i0, j0 + 1] * (1 - tx) * ty
        + cells[i0 + 1, j0 + 1] * tx * ty
    )


def quantum_clock(path: BrownianPath, field: FieldGrid, gamma: float, eps: float) -> QuantumClock:
    """Quantum clock of the path under the field at scale eps."""
    dom = field.domain
    x, y = path.positions[:, 0], path.positions[:, 1]
    if not dom.contains(x, y, closed=True).all():
        raise DomainError("path leaves the field domain")
    if gamma == 0.0:
        return QuantumClock(phi=path.times.copy(), eps=eps, gamma=0.0, path_len=len(path.times))
    h_cells = circle_average_cells(field, eps)
    h_on_path = cell_grid_sample(h_cells, dom, x[:-1], y[:-1])
    dts = np.diff(path.times)
    phi = np.empty(len(path.times))
    phi[0] = 0.0
    np.cumsum(eps ** (gamma**2 / 2.0) * np.exp(gamma * h_on_path) * dts, out=phi[1:])
    return QuantumClock(phi=phi, eps=eps, gamma=gamma, path_len=len(path.times))


@dataclass
class LbmTrajectory:
    """The time-changed path: same positions, quantum timestamps."""

    quantum_times: np.ndarray
    positions: np.ndarray

    def position_at(self, t: float) -> np.ndarray:
        """Left-continuous inverse of the clock."""
        j = int(np.searchsorted(self.quantum_times, t, side="right")) - 1
        return self.positions[max(j, 0)]


def lbm_trajectory(path: BrownianPath, clock: QuantumClock) -> LbmTrajectory:
    if clock.path_len != len(path.times):
        raise ConfigurationError("clock was not built from this path")
    return LbmTrajectory(quantum_times=clock.phi, positions=path.positions)


def quadratic_variation_proxy(traj: LbmTrajectory, t_quantum: float) -> float:
    """Per-coordinate quadratic variation sum up to quantum time t.

    Estimates the inverse clock at t (each coordinate of the underlying
    motion accrues dt of quadratic variation per step, so the squared
    two-dimensional step norms are halved).
    """
    j = int(np.searchsorted(traj.quantum_times, t_quantum, side="right")) - 1
    if j < 1:
        return 0.0
    steps = np.diff(traj.positions[: j + 1], axis=0)
    return float(np.sum(steps**2) / 2.0)


def occupation_quantum_measure(
    path: BrownianPath, clock: QuantumClock, center, radius: float
) -> float:
    """Quantum mass accumulated while the path is in the ball B_radius(center)."""
    if clock.path_len != len(path.times):
        raise ConfigurationError("clock was not built from this path")
    p = path.positions[:-1]
    inside = (p[:, 0] - center[0]) ** 2 + (p[:, 1] - center[1]) ** 2 < radius**2
    return float(clock.increments()[inside].sum())


def occupation_quantum_box(
    path: BrownianPath, clock: QuantumClock, xlo: float, xhi: float, ylo: float, yhi: float
) -> float:
    """Quantum mass in a half-open box (exactly additive over partitions)."""
    if clock.path_len != len(path.times):
        raise ConfigurationError("clock was not built from this path")
    p = path.positions[:-1]
    inside = (p[:, 0] >= xlo) & (p[:, 0] < xhi) & (p[:, 1] >= ylo) & (p[:, 1] < yhi)
    return float(clock.increments()[inside].sum())


# --------------------------------------------------------------------------
# harmonic measure by walk-on-spheres with capture


@dataclass
class HarmonicMeasureSample:
    viewpoint: tuple
    cells: np.ndarray  # (K, 2) int cell indices on the domain cell grid
    weights: np.ndarray  # (K,), sums to 1
    is_boundary: np.ndarray  # (K,) bool: hit on the outer circle
    walkers: int
    capture_radius: float
    resolution: int
    failures: int = 0


class RangeGeometry:
    """Distance field and nearest-cell map of a path's capture tube."""

    def __init__(self, path: BrownianPath, resolution: int):
        self.resolution = n = resolution
        self.pixel = 1.0 / n
        self.origin = -1.0
        occ = np.zeros((2 * n, 2 * n), dtype=bool)
        ix = np.clip(((path.positions[:, 0] + 1.0) * n).astype(np.int64), 0, 2 * n - 1)
        iy = np.clip(((path.positions[:, 1] + 1.0) * n).astype(np.int64), 0, 2 * n - 1)
        occ[ix, iy] = True
        dist, (ni, nj) = ndi.distance_transform_edt(
            ~occ, sampling=self.pixel, return_indices=True
        )
        self.dist = np.ascontiguousarray(dist)
        self.nearest_i = ni
        self.nearest_j = nj

    def distance_at(self, x: float, y: float) -> float:
        fx = (x - self.origin) / self.pixel - 0.5
        fy = (y - self.origin) / self.pixel - 0.5
        return float(_bilin(self.dist, fx, fy))

    def nearest_cell(self, x: float, y: float) -> tuple[int, int]:
        n = self.resolution
        i = int(np.clip((x - self.origin) * n, 0, 2 * n - 1))
        j = int(np.clip((y - self.origin) * n, 0, 2 * n - 1))
        return int(self.nearest_i[i, j]), int(self.nearest_j[i, j])


def _bilin(a: np.ndarray, fx, fy):
    nx, ny = a.shape
    fx = np.clip(fx, 0, nx - 1)
    fy = np.clip(fy, 0, ny - 1)
    i0 = np.minimum(np.floor(fx).astype(np.int64), nx - 2)
    j0 = np.minimum(np.floor(fy).astype(np.int64), ny - 2)
    tx, ty = fx - i0, fy - j0
    return (
        a[i0, j0] * (1 - tx) * (1 - ty)
        + a[i0 + 1, j0] * tx * (1 - ty)
        + a[i0, j0 + 1] * (1 - tx) * ty
        + a[i0 + 1, j0 + 1] * tx * ty
    )


_WOS_CHUNK = 64
_WOS_MAX_ROUNDS = 4096


def harmonic_measure(
    path: BrownianPath,
    z,
    walkers: int,
    capture_radius: float | None = None,
    seed: int = 0,
    resolution: int | None = None,
) -> HarmonicMeasureSample:
    """Empirical exit distribution of the disk minus the path's capture tube.

    Walk-on-spheres: each jump samples the exact exit point of the largest
    safe ball, until the walker is within capture_radius of the range or
    within the boundary band of the outer circle.
    """
    if walkers < 1000:
        raise PreconditionError("need at least 1000 walkers")
    n = resolution or 256
    capture = capture_radius if capture_radius is not None else 2.0 / n
    geom = RangeGeometry(path, n)
    zx, zy = float(z[0]), float(z[1])
    if geom.distance_at(zx, zy) <= capture + geom.pixel:
        raise PreconditionError("viewpoint inside the capture tube of the range")
    if math.hypot(zx, zy) >= 1.0:
        raise PreconditionError("viewpoint outside the domain")

    rng = rng_for(seed, 0, STREAM_WALKERS)
    px = np.full(walkers, zx)
    py = np.full(walkers, zy)
    status = np.zeros(walkers, dtype=np.int8)  # 0 active, 1 range, 2 boundary
    safety = 0.75 * geom.pixel
    for _ in range(_WOS_MAX_ROUNDS):
        if not (status == 0).any():
            break
        theta = 2.0 * math.pi * rng.random((walkers, _WOS_CHUNK))
        wos_advance(
            px,
            py,
            status,
            geom.dist,
            geom.origin,
            geom.pixel,
            safety,
            capture,
            capture,
            np.cos(theta),
            np.sin(theta),
        )
    failures = int((status == 0).sum())
    if failures:
        log.warning("harmonic_measure: %d walkers did not terminate", failures)
        status[status == 0] = 3

    cells = {}
    for k in range(walkers):
        if status[k] == 1:
            cell = geom.nearest_cell(px[k], py[k])
            key = (cell, False)
        elif status[k] == 2:
            r = math.hypot(px[k], py[k])
            bx, by = px[k] / r, py[k] / r
            i = int(np.clip((bx + 1.0) * n, 0, 2 * n - 1))
            j = int(np.clip((by + 1.0) * n, 0, 2 * n - 1))
            key = ((i, j), True)
        else:
            continue
        cells[key] = cells.get(key, 0) + 1
    total = sum(cells.values())
    keys = sorted(cells.keys(), key=lambda k: (k[1], k[0]))
    return HarmonicMeasureSample(
        viewpoint=(zx, zy),
        cells=np.array([k[0] for k in keys], dtype=np.int64),
        weights=np.array([cells[k] / total for k in keys]),
        is_boundary=np.array([k[1] for k in keys], dtype=bool),
        walkers=walkers,
        capture_radius=capture,
        resolution=n,
        failures=failures,
    )


def _cell_center(omega: HarmonicMeasureSample, cell) -> tuple[float, float]:
    n = omega.resolution
    return (-1.0 + (cell[0] + 0.5) / n, -1.0 + (cell[1] + 0.5) / n)


def _occupation_step_lists(path: BrownianPath, omega: HarmonicMeasureSample, eps: float):
    """Step indices of the path inside B_eps around each non-boundary hit cell."""
    key = (omega.resolution, eps, id(omega))
    cache = getattr(path, "_occ_cache", None)
    if cache is None:
        cache = {}
        path._occ_cache = cache
    if key in cache:
        return cache[key]
    tree = getattr(path, "_kdtree", None)
    if tree is None:
        tree = cKDTree(path.positions[:-1])
        path._kdtree = tree
    centers = [
        _cell_center(omega, c)
        for c, b in zip(omega.cells, omega.is_boundary)
        if not b
    ]
    lists = tree.query_ball_point(np.asarray(centers), eps) if centers else []
    cache[key] = lists
    return lists


def harmonic_extension_estimator(
    omega: HarmonicMeasureSample,
    path: BrownianPath,
    clock: QuantumClock,
    gamma: float,
    eps: float,
) -> float:
    """Hit-weighted average of (1/gamma) log(quantum occupation of B_eps).

    Boundary hits contribute the value 0; hit cells with zero occupation
    mass are excluded with a counted warning.
    """
    if gamma == 0.0:
        raise ParameterError("estimator undefined at gamma = 0")
    if clock.path_len != len(path.times):
        raise ConfigurationError("clock was not built from this path")
    dphi = clock.increments()
    lists = _occupation_step_lists(path, omega, eps)
    value = 0.0
    excluded = 0
    li = 0
    for cell, w, isb in zip(omega.cells, omega.weights, omega.is_boundary):
        if isb:
            continue  # boundary hits contribute 0
        idxs = lists[li]
        li += 1
        mass = float(dphi[idxs].sum()) if len(idxs) else 0.0
        if mass <= 0.0:
            excluded += 1
            continue
        value += w * math.log(mass) / gamma
    if excluded:
        log.warning(
            "harmonic_extension_estimator: %d hit cells had zero occupation", excluded
        )
    return value


def harmonic_extension_true(
    field: FieldGrid, omega: HarmonicMeasureSample, eps: float
) -> float:
    """Reference value: omega-weighted circle averages of the actual field."""
    h_cells = circle_average_cells(field, eps)
    value = 0.0
    for cell, w, isb in zip(omega.cells, omega.weights, omega.is_boundary):
        if isb:
            continue
        cx, cy = _cell_center(omega, cell)
        value += w * float(
            cell_grid_sample(h_cells, field.domain, cx, cy)
        )
    return value
