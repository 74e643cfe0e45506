"""Measure-to-field estimators and residual statistics.

The field estimate at scale eps is
    h_est(x) = (1/gamma) * log( sum_cells eta_eps(x - z_cell) * mass(cell) )
and its boundary analogue uses (2/gamma) * log of the 1D convolution.
The residual f_eps(z) = h_est(z) - h_circle(z) is the quantity whose
variance/covariance decay certifies that the measure determines the field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi
import scipy.signal as ssig

from .domains import DomainSpec, Shape
from .errors import ConfigurationError, ParameterError, PreconditionError, ShapeError
from .gff import FieldGrid, circle_average
from .measures import CellMeasure, LineMeasure
from .smoothing import Kernel

NEG_INF = float("-inf")


def _check_probe_margin(domain: DomainSpec, probes, eps: float):
    px = np.asarray([p[0] for p in probes], dtype=float)
    py = np.asarray([p[1] for p in probes], dtype=float)
    if domain.shape is Shape.UNIT_SQUARE:
        ok = (px > eps) & (px < 1 - eps) & (py > eps) & (py < 1 - eps)
    else:
        ok = np.hypot(px, py) + eps < 1.0
    if not ok.all():
        raise PreconditionError("probe closer than kernel.eps to the boundary")


def estimate_field(
    measure: CellMeasure, kernel: Kernel, gamma: float, probes
) -> np.ndarray:
    """Per-probe field estimate from the area measure.

    Probes with zero window mass yield -inf (degenerate inputs only).
    """
    if gamma == 0.0:
        raise ParameterError("the estimator is undefined at gamma = 0")
    if kernel.dimension != 2 or kernel.resolution != measure.domain.resolution:
        raise ConfigurationError("kernel does not match the measure lattice")
    _check_probe_margin(measure.domain, probes, kernel.eps)
    CX, CY = measure.cell_centers()
    n = measure.domain.resolution
    x0, y0 = measure.domain.origin_xy
    k = kernel.weights.shape[0] // 2
    out = np.empty(len(probes))
    for i, (px, py) in enumerate(probes):
        ci = int(math.floor((px - x0) * n - 0.5))
        cj = int(math.floor((py - y0) * n - 0.5))
        lo_i, hi_i = max(ci - k, 0), min(ci + k + 2, CX.shape[0])
        lo_j, hi_j = max(cj - k, 0), min(cj + k + 2, CX.shape[1])
        wx = CX[lo_i:hi_i, lo_j:hi_j] - px
        wy = CY[lo_i:hi_i, lo_j:hi_j] - py
        window = float(
            np.sum(kernel.value_at(wx, wy) * measure.mass[lo_i:hi_i, lo_j:hi_j])
        )
        out[i] = math.log(window) / gamma if window > 0 else NEG_INF
    return out


def estimate_field_grid(measure: CellMeasure, kernel: Kernel, gamma: float) -> np.ndarray:
    """Field estimate at every cell center (one convolution).

    Cells with nonpositive window mass get -inf.
    """
    if gamma == 0.0:
        raise ParameterError("the estimator is undefined at gamma = 0")
    conv = ssig.fftconvolve(measure.mass, kernel.weights, mode="same")
    out = np.full(conv.shape, NEG_INF)
    pos = conv > 0
    out[pos] = np.log(conv[pos]) / gamma
    return out


def boundary_estimate(
    measure: LineMeasure, kernel: Kernel, gamma: float, probes
) -> np.ndarray:
    """Per-probe boundary trace estimate, h = (2/gamma) log(eta_eps * nu)."""
    if gamma == 0.0:
        raise ParameterError("the estimator is undefined at gamma = 0")
    if kernel.dimension != 1:
        raise ConfigurationError("boundary estimation needs a 1D kernel")
    probes = np.asarray(probes, dtype=float)
    if np.any(np.abs(probes) + kernel.eps >= 1.0):
        raise PreconditionError("probe closer than kernel.eps to an endpoint")
    centers = measure.bin_centers()
    out = np.empty(len(probes))
    for i, x in enumerate(probes):
        window = float(np.sum(kernel.value_at(x - centers) * measure.mass))
        out[i] = 2.0 * math.log(window) / gamma if window > 0 else NEG_INF
    return out


def boundary_estimate_bins(measure: LineMeasure, kernel: Kernel, gamma: float) -> np.ndarray:
    """Boundary estimate at every bin center (1D convolution)."""
    if gamma == 0.0:
        raise ParameterError("the estimator is undefined at gamma = 0")
    conv = np.convolve(measure.mass, kernel.weights, mode="same")
    out = np.full(conv.shape, NEG_INF)
    pos = conv > 0
    out[pos] = 2.0 * np.log(conv[pos]) / gamma
    return out


def recenter(estimates: np.ndarray) -> np.ndarray:
    """Subtract the cross-replicate empirical mean per probe.

    ``estimates`` has shape (replicates, probes).
    """
    estimates = np.asarray(estimates, dtype=float)
    if estimates.ndim != 2 or estimates.shape[0] < 2:
        raise PreconditionError("recentering needs at least 2 replicates")
    return estimates - estimates.mean(axis=0, keepdims=True)


def lognormal_centering(gamma: float, window_variance: float) -> float:
    """Theory-predicted centering of the estimator, (gamma/2) * Var."""
    return 0.5 * gamma * window_variance


def _jackknife_se(values: np.ndarray, stat) -> float:
    n = len(values)
    leave = np.array([stat(np.delete(values, i, axis=0)) for i in range(n)])
    return float(np.sqrt((n - 1) / n * np.sum((leave - leave.mean()) ** 2)))


@dataclass
class ResidualStats:
    probes: list
    eps: float
    gamma: float
    residuals: np.ndarray  # (replicates, probes)
    var: np.ndarray
    var_se: np.ndarray
    pairs: list
    cov: np.ndarray
    cov_se: np.ndarray


def residual_statistics(
    replicates, kernel: Kernel, gamma: float, probes, pairs=None
) -> ResidualStats:
    """Variance/covariance of f_eps = h_est - h_circle across replicates.

    ``replicates`` is a list of (FieldGrid, CellMeasure) sharing domain,
    gamma and measure scale; ``pairs`` is a list of probe index pairs.
    """
    if len(replicates) < 2:
        raise PreconditionError("need at least 2 replicates")
    dom = replicates[0][0].domain
    meps = replicates[0][1].eps
    for f, m in replicates:
        if f.domain != dom or m.domain != dom:
            raise ConfigurationError("replicates live on different domains")
        if m.eps != meps or m.gamma != replicates[0][1].gamma:
            raise ConfigurationError("replicates have mismatched measure metadata")
    pairs = pairs or []
    rows = []
    for f, m in replicates:
        h_est = estimate_field(m, kernel, gamma, probes)
        h_circ = np.array([circle_average(f, p, kernel.eps) for p in probes])
        rows.append(h_est - h_circ)
    res = np.asarray(rows)
    if not np.isfinite(res).all():
        raise ConfigurationError("degenerate probe (zero window mass) in a replicate")
    var = res.var(axis=0, ddof=1)
    var_se = np.array(
        [_jackknife_se(res[:, j], lambda v: v.var(ddof=1)) for j in range(res.shape[1])]
    )
    cov = np.empty(len(pairs))
    cov_se = np.empty(len(pairs))
    for k, (a, b) in enumerate(pairs):
        both = res[:, (a, b)]
        cov[k] = np.cov(both.T, ddof=1)[0, 1]
        cov_se[k] = _jackknife_se(both, lambda v: np.cov(v.T, ddof=1)[0, 1])
    return ResidualStats(
        probes=list(probes),
        eps=kernel.eps,
        gamma=gamma,
        residuals=res,
        var=var,
        var_se=var_se,
        pairs=list(pairs),
        cov=cov,
        cov_se=cov_se,
    )


def test_function_pairing(values: np.ndarray, rho: np.ndarray, domain: DomainSpec) -> float:
    """Discrete L2 pairing sum(values * rho) * cell area.

    ``rho`` must be compactly supported in the interior: zero on and next
    to every non-domain cell/node.
    """
    values = np.asarray(values, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if values.shape != rho.shape:
        raise ShapeError(f"shape mismatch {values.shape} vs {rho.shape}")
    if rho.shape == domain.node_shape:
        mask = domain.interior_mask()
    elif rho.shape == domain.cell_shape:
        mask = domain.cell_mask()
    else:
        raise ShapeError("rho matches neither the node nor the cell grid")
    safe = ndi.binary_erosion(mask, iterations=1, border_value=0)
    if np.any(rho[~safe] != 0.0):
        raise PreconditionError("test function support touches the boundary")
    return float(np.sum(values * rho) * domain.cell_area)
