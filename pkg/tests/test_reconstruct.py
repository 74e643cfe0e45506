import math

import numpy as np
import pytest

from lqglab.domains import BoundaryCondition, DomainSpec, Shape
from lqglab.errors import ConfigurationError, ParameterError, PreconditionError
from lqglab.gff import constant_field, sample_gff
from lqglab.measures import CellMeasure, LineMeasure, build_boundary_measure, build_liouville_measure
from lqglab.reconstruct import (
    boundary_estimate,
    estimate_field,
    estimate_field_grid,
    lognormal_centering,
    recenter,
    residual_statistics,
)
from lqglab.reconstruct import test_function_pairing as field_pairing
from lqglab.smoothing import bump_profile, make_kernel

PROBES = [(0.0, 0.0), (0.2, -0.1)]


def _lebesgue_measure(domain):
    f = constant_field(domain, 0.0)
    mu = build_liouville_measure(f, 0.0, 2.0 / domain.resolution)
    return mu


def test_lebesgue_gives_zero(disk64):
    """Unit-density measure with the scale factor removed: h = 0.

    Exact at lattice-aligned probes, where the discrete window sum is the
    kernel's own normalization sum."""
    mu = _lebesgue_measure(disk64)
    kernel = make_kernel(2.0**-3, 2, 64)
    CX, CY = disk64.cell_centers()
    probes = [(CX[64, 64], CY[64, 64]), (CX[50, 70], CY[50, 70])]
    vals = estimate_field(mu, kernel, gamma=1.0, probes=probes)
    assert np.allclose(vals, 0.0, atol=1e-10)
    # off-lattice probes: zero up to the lattice discretization error
    vals_off = estimate_field(mu, kernel, gamma=1.0, probes=PROBES)
    assert np.allclose(vals_off, 0.0, atol=5e-3)


def test_shift_exactness(disk64):
    """estimate_field(e^{gamma C} mu) = estimate_field(mu) + C, machine precision."""
    f = sample_gff(disk64, seed=1)
    gamma, c = 0.5, 0.9
    mu = build_liouville_measure(f, gamma, 2.0**-4)
    kernel = make_kernel(2.0**-3, 2, 64)
    base = estimate_field(mu, kernel, gamma, PROBES)
    shifted = estimate_field(mu.scaled(math.exp(gamma * c)), kernel, gamma, PROBES)
    assert np.allclose(shifted - base, c, atol=1e-12)


def test_kernel_mass_invariance(disk64):
    """Scaling kernel weights up and dividing the window mass back out
    leaves the estimator unchanged (log-linearity)."""
    f = sample_gff(disk64, seed=2)
    gamma = 0.5
    mu = build_liouville_measure(f, gamma, 2.0**-4)
    kernel = make_kernel(2.0**-3, 2, 64)
    base = estimate_field(mu, kernel, gamma, PROBES)
    scaled = estimate_field(mu.scaled(7.0), kernel, gamma, PROBES)
    assert np.allclose(scaled - math.log(7.0) / gamma, base, atol=1e-12)


def test_gamma_zero_rejected(disk64):
    mu = _lebesgue_measure(disk64)
    kernel = make_kernel(2.0**-3, 2, 64)
    with pytest.raises(ParameterError):
        estimate_field(mu, kernel, 0.0, PROBES)


def test_probe_margin(disk64):
    mu = _lebesgue_measure(disk64)
    kernel = make_kernel(2.0**-3, 2, 64)
    with pytest.raises(PreconditionError):
        estimate_field(mu, kernel, 1.0, [(0.95, 0.0)])


def test_grid_matches_pointwise(disk64):
    f = sample_gff(disk64, seed=3)
    gamma = 0.7
    mu = build_liouville_measure(f, gamma, 2.0**-4)
    kernel = make_kernel(2.0**-3, 2, 64)
    grid = estimate_field_grid(mu, kernel, gamma)
    CX, CY = disk64.cell_centers()
    for i, j in [(64, 64), (40, 70)]:
        pt = estimate_field(mu, kernel, gamma, [(CX[i, j], CY[i, j])])[0]
        assert grid[i, j] == pytest.approx(pt, abs=1e-9)


def test_brute_force_convolution_2d():
    """FFT path vs direct double loop on a 32-cell domain, 1e-12."""
    dom = DomainSpec(Shape.UNIT_SQUARE, 32, BoundaryCondition.DIRICHLET)
    f = sample_gff(dom, seed=4)
    gamma = 0.5
    mu = build_liouville_measure(f, gamma, 2.0**-4)
    kernel = make_kernel(2.0**-3, 2, 32)
    grid = estimate_field_grid(mu, kernel, gamma)
    CX, CY = dom.cell_centers()
    k = kernel.weights.shape[0] // 2
    for i, j in [(16, 16), (10, 20)]:
        acc = 0.0
        for a in range(32):
            for b in range(32):
                acc += kernel.value_at(
                    np.array([CX[a, b] - CX[i, j]]), np.array([CY[a, b] - CY[i, j]])
                )[0] * mu.mass[a, b]
        assert grid[i, j] == pytest.approx(math.log(acc) / gamma, abs=1e-12)


def test_brute_force_convolution_1d(upper64):
    f = sample_gff(upper64, seed=5)
    gamma = 0.5
    nu = build_boundary_measure(f, gamma, 2.0**-4)
    kernel = make_kernel(2.0**-3, 1, 64)
    probes = [0.0, 0.25]
    vals = boundary_estimate(nu, kernel, gamma, probes)
    centers = nu.bin_centers()
    for p, x in enumerate(probes):
        acc = sum(
            kernel.value_at(np.array([x - c]))[0] * m
            for c, m in zip(centers, nu.mass)
        )
        assert vals[p] == pytest.approx(2.0 * math.log(acc) / gamma, abs=1e-12)


def test_boundary_shift_exactness(upper64):
    f = sample_gff(upper64, seed=6)
    gamma, c = 0.5, 1.1
    nu = build_boundary_measure(f, gamma, 2.0**-4)
    kernel = make_kernel(2.0**-3, 1, 64)
    base = boundary_estimate(nu, kernel, gamma, [0.0, -0.3])
    shifted = boundary_estimate(
        nu.scaled(math.exp(gamma * c / 2)), kernel, gamma, [0.0, -0.3]
    )
    assert np.allclose(shifted - base, c, atol=1e-12)


def test_recenter_properties():
    est = np.array([[1.0, 2.0], [1.0, 4.0]])
    c = recenter(est)
    assert np.allclose(c.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(recenter(est + 5.0), c)
    same = recenter(np.array([[1.0, 2.0], [1.0, 2.0]]))
    assert np.all(same == 0)
    with pytest.raises(PreconditionError):
        recenter(np.array([[1.0, 2.0]]))


def test_lognormal_centering():
    assert lognormal_centering(0.8, 2.0) == pytest.approx(0.8)


def test_residual_statistics_shapes(disk64):
    gamma = 0.5
    reps = []
    for seed in range(6):
        f = sample_gff(disk64, seed=seed)
        reps.append((f, build_liouville_measure(f, gamma, 2.0**-4)))
    kernel = make_kernel(2.0**-3, 2, 64)
    stats = residual_statistics(reps, kernel, gamma, PROBES, pairs=[(0, 1)])
    assert stats.residuals.shape == (6, 2)
    assert np.all(stats.var > 0)
    assert np.all(np.isfinite(stats.var_se))
    assert stats.cov.shape == (1,)


def test_residual_statistics_metadata_mismatch(disk64):
    gamma = 0.5
    f1 = sample_gff(disk64, seed=1)
    f2 = sample_gff(disk64, seed=2)
    reps = [
        (f1, build_liouville_measure(f1, gamma, 2.0**-4)),
        (f2, build_liouville_measure(f2, gamma, 2.0**-3)),
    ]
    kernel = make_kernel(2.0**-3, 2, 64)
    with pytest.raises(ConfigurationError):
        residual_statistics(reps, kernel, gamma, PROBES)


def test_pairing_properties(disk64):
    CX, CY = disk64.cell_centers()
    rho = bump_profile(np.hypot(CX, CY) / 0.4)
    zero = np.zeros(disk64.cell_shape)
    assert field_pairing(zero, rho, disk64) == 0.0
    f = np.cos(CX * 3) * np.sin(CY * 2)
    g = CX * CY
    lhs = field_pairing(f + g, rho, disk64)
    rhs = field_pairing(f, rho, disk64) + field_pairing(g, rho, disk64)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    # direct-sum oracle
    oracle = float(np.sum(rho * rho) * disk64.cell_area)
    assert field_pairing(rho, rho, disk64) == pytest.approx(oracle, rel=1e-12)


def test_pairing_support_check(disk64):
    rho = np.ones(disk64.cell_shape)
    with pytest.raises(PreconditionError):
        field_pairing(rho, rho, disk64)


def test_monotone_information(disk64):
    """Var[(f_eps, rho)] decreases as eps decreases (within 2 se)."""
    gamma, nrep = 0.5, 60
    kernel_c = make_kernel(2.0**-3, 2, 64)
    kernel_f = make_kernel(2.0**-4, 2, 64)
    CX, CY = disk64.cell_centers()
    rho = bump_profile(np.hypot(CX, CY) / 0.4)
    rho /= rho.sum() * disk64.cell_area
    support = rho > 0
    pair_c, pair_f = [], []
    for seed in range(nrep):
        f = sample_gff(disk64, seed=seed)
        mu = build_liouville_measure(f, gamma, 2.0**-5)
        from lqglab.gff import circle_average_cells

        for kernel, out in ((kernel_c, pair_c), (kernel_f, pair_f)):
            grid = estimate_field_grid(mu, kernel, gamma)
            circ = circle_average_cells(f, kernel.eps)
            resid = grid - circ
            out.append(float(np.sum(resid[support] * rho[support]) * disk64.cell_area))
    v_c, v_f = np.var(pair_c, ddof=1), np.var(pair_f, ddof=1)
    se = math.sqrt(2.0 / (nrep - 1)) * max(v_c, v_f)
    assert v_f <= v_c + 2 * se
