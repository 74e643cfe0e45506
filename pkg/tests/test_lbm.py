import math

import numpy as np
import pytest

from lqglab import lbm
from lqglab.domains import BoundaryCondition, DomainSpec, Shape
from lqglab.errors import ConfigurationError, DomainError, ParameterError, PreconditionError
from lqglab.gff import constant_field, sample_gff


@pytest.fixture(scope="module")
def disk128():
    return DomainSpec(Shape.UNIT_DISK, 128, BoundaryCondition.DIRICHLET)


@pytest.fixture(scope="module")
def path128():
    return lbm.sample_brownian_path((1.0 / 128) ** 2 / 4, seed=7, resolution=128)


def test_path_starts_at_zero_and_exits(path128):
    assert np.all(path128.positions[0] == 0.0)
    r_end = math.hypot(*path128.positions[-1])
    assert r_end == pytest.approx(0.5, abs=1e-12)
    # all intermediate points strictly inside the stopping circle
    interior = path128.positions[:-1]
    assert np.all(np.hypot(interior[:, 0], interior[:, 1]) < 0.5)


def test_path_determinism():
    a = lbm.sample_brownian_path(1e-4, seed=3)
    b = lbm.sample_brownian_path(1e-4, seed=3)
    assert np.array_equal(a.positions, b.positions)
    c = lbm.sample_brownian_path(1e-4, seed=4)
    assert not np.array_equal(a.positions, c.positions)


def test_dt_precondition():
    with pytest.raises(PreconditionError):
        lbm.sample_brownian_path(1e-2, seed=1, resolution=64)


@pytest.mark.slow
def test_mean_exit_time_oracle():
    """E[tau] = r^2/2 = 1/8 for the radius-1/2 disk, within 3%."""
    dt = (1.0 / 128) ** 2
    taus = [lbm.sample_brownian_path(dt, seed=s).exit_time for s in range(10_000)]
    assert abs(np.mean(taus) - 0.125) < 0.03 * 0.125


@pytest.mark.slow
def test_exit_point_uniform_chi_square():
    """Chi-square over 16 arcs at the 1% level (threshold 30.58, 15 dof)."""
    dt = (1.0 / 64) ** 2
    angles = []
    for s in range(10_000):
        p = lbm.sample_brownian_path(dt, seed=s).positions[-1]
        angles.append(math.atan2(p[1], p[0]))
    counts, _ = np.histogram(angles, bins=16, range=(-math.pi, math.pi))
    expected = len(angles) / 16
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    assert chi2 < 30.58


def test_clock_identity_gamma_zero(path128, disk128):
    field = constant_field(disk128, 0.0)
    clock = lbm.quantum_clock(path128, field, 0.0, 2.0**-4)
    assert np.array_equal(clock.phi, path128.times)


def test_clock_monotone_and_zero_start(path128, disk128):
    field = sample_gff(disk128, seed=5)
    clock = lbm.quantum_clock(path128, field, 0.8, 2.0**-4)
    assert clock.phi[0] == 0.0
    assert np.all(np.diff(clock.phi) >= 0)
    assert np.isfinite(clock.total)


def test_clock_shift_covariance_exact(path128, disk128):
    field = sample_gff(disk128, seed=6)
    gamma, c = 0.6, 0.9
    base = lbm.quantum_clock(path128, field, gamma, 2.0**-4)
    shifted = lbm.quantum_clock(path128, field.shifted(c), gamma, 2.0**-4)
    assert np.allclose(shifted.phi, base.phi * math.exp(gamma * c), rtol=1e-12)


def test_trajectory_gamma_zero_identity(path128, disk128):
    field = constant_field(disk128, 0.0)
    clock = lbm.quantum_clock(path128, field, 0.0, 2.0**-4)
    traj = lbm.lbm_trajectory(path128, clock)
    assert np.array_equal(traj.quantum_times, path128.times)
    assert traj.positions is path128.positions  # identical ranges


def test_trajectory_mismatch(path128, disk128):
    other = lbm.sample_brownian_path((1.0 / 128) ** 2 / 4, seed=8, resolution=128)
    field = constant_field(disk128, 0.0)
    clock = lbm.quantum_clock(other, field, 0.0, 2.0**-4)
    if len(clock.phi) != len(path128.times):
        with pytest.raises(ConfigurationError):
            lbm.lbm_trajectory(path128, clock)


def test_quadratic_variation_proxy(path128, disk128):
    """Sum |dZ|^2 / 2 up to quantum time t recovers the inverse clock
    within 10% at gamma = 0.5."""
    field = sample_gff(disk128, seed=9)
    clock = lbm.quantum_clock(path128, field, 0.5, 2.0**-4)
    traj = lbm.lbm_trajectory(path128, clock)
    t_q = clock.total / 2
    qv = lbm.quadratic_variation_proxy(traj, t_q)
    j = int(np.searchsorted(clock.phi, t_q, side="right")) - 1
    true_inverse = path128.times[j]
    assert abs(qv - true_inverse) < 0.10 * true_inverse


def test_occupation_disjoint_window(path128, disk128):
    field = sample_gff(disk128, seed=10)
    clock = lbm.quantum_clock(path128, field, 0.5, 2.0**-4)
    assert lbm.occupation_quantum_measure(path128, clock, (0.9, 0.0), 0.05) == 0.0


def test_occupation_partition_additivity(path128, disk128):
    field = sample_gff(disk128, seed=11)
    clock = lbm.quantum_clock(path128, field, 0.5, 2.0**-4)
    edges = np.linspace(-0.6, 0.6, 7)
    total = sum(
        lbm.occupation_quantum_box(
            path128, clock, edges[i], edges[i + 1], edges[j], edges[j + 1]
        )
        for i in range(6)
        for j in range(6)
    )
    assert total == pytest.approx(clock.total, abs=1e-15)


def test_occupation_gamma_zero_is_time_binning(path128, disk128):
    field = constant_field(disk128, 0.0)
    clock = lbm.quantum_clock(path128, field, 0.0, 2.0**-4)
    occ = lbm.occupation_quantum_measure(path128, clock, (0.1, 0.0), 0.2)
    # direct time-binning oracle
    p = path128.positions[:-1]
    inside = (p[:, 0] - 0.1) ** 2 + p[:, 1] ** 2 < 0.2**2
    direct = float(np.diff(path128.times)[inside].sum())
    assert occ == pytest.approx(direct, abs=1e-12)


@pytest.fixture(scope="module")
def omega128(path128):
    return lbm.harmonic_measure(path128, (0.75, 0.0), walkers=4000, seed=2, resolution=128)


def test_harmonic_measure_probability(omega128):
    assert omega128.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(omega128.weights > 0)
    assert omega128.failures == 0


def test_harmonic_measure_viewpoint_checks(path128):
    with pytest.raises(PreconditionError):
        lbm.harmonic_measure(path128, (0.0, 0.0), walkers=4000, seed=1, resolution=128)
    with pytest.raises(PreconditionError):
        lbm.harmonic_measure(path128, (0.75, 0.0), walkers=10, seed=1, resolution=128)


def test_harmonic_measure_resampling_stability(path128, omega128):
    other = lbm.harmonic_measure(path128, (0.75, 0.0), walkers=4000, seed=3, resolution=128)
    # boundary mass differs by O(walkers^{-1/2})
    b1 = omega128.weights[omega128.is_boundary].sum()
    b2 = other.weights[other.is_boundary].sum()
    assert abs(b1 - b2) < 5.0 / math.sqrt(4000)


def test_harmonic_measure_symmetry_segment():
    """Range = a straight segment through the disk; viewpoint on its
    perpendicular bisector sees symmetric hit mass."""
    xs = np.linspace(-0.45, 0.45, 2000)
    positions = np.column_stack([xs, np.zeros_like(xs)])
    times = np.arange(len(xs), dtype=float) * 1e-5
    path = lbm.BrownianPath(
        times=times,
        positions=positions,
        dt=1e-5,
        stop_radius=0.5,
        domain_radius=1.0,
        exit_flag="inner",
    )
    om = lbm.harmonic_measure(path, (0.0, 0.5), walkers=10_000, seed=4, resolution=128)
    n = om.resolution
    ys = -1.0 + (om.cells[:, 1] + 0.5) / n
    left = om.weights[(om.cells[:, 0] + 0.5) / n - 1.0 < 0].sum()
    assert abs(left - 0.5) < 0.02


def test_harmonic_measure_monotone_capture(path128):
    """Mass hitting the outer circle shrinks as the viewpoint approaches
    the range."""
    geom = lbm.RangeGeometry(path128, 128)
    pts = [(0.9, 0.0), (0.75, 0.0), (0.62, 0.0)]
    masses = []
    for z in pts:
        om = lbm.harmonic_measure(path128, z, walkers=4000, seed=5, resolution=128)
        masses.append(float(om.weights[om.is_boundary].sum()))
    assert masses[0] > masses[1] > masses[2]


def test_extension_true_zero_field_and_linearity(path128, disk128, omega128):
    zero = constant_field(disk128, 0.0)
    assert lbm.harmonic_extension_true(zero, omega128, 2.0**-4) == 0.0
    f = sample_gff(disk128, seed=12)
    g = sample_gff(disk128, seed=13)
    a = lbm.harmonic_extension_true(f, omega128, 2.0**-4)
    b = lbm.harmonic_extension_true(g, omega128, 2.0**-4)
    s = lbm.harmonic_extension_true(f.plus(g), omega128, 2.0**-4)
    assert s == pytest.approx(a + b, abs=1e-10)


def test_extension_estimator_shift(path128, disk128, omega128):
    """field+C shifts the estimator by C * (range hit mass), exactly."""
    f = sample_gff(disk128, seed=14)
    gamma, eps, c = 0.5, 2.0**-4, 1.2
    clock = lbm.quantum_clock(path128, f, gamma, eps)
    clock_shift = lbm.quantum_clock(path128, f.shifted(c), gamma, eps)
    e1 = lbm.harmonic_extension_estimator(omega128, path128, clock, gamma, eps)
    e2 = lbm.harmonic_extension_estimator(omega128, path128, clock_shift, gamma, eps)
    range_mass = float(omega128.weights[~omega128.is_boundary].sum())
    assert e2 - e1 == pytest.approx(c * range_mass, abs=1e-10)


def test_extension_estimator_deterministic_input(path128, disk128, omega128):
    """Flat field: estimator equals the omega-average of the log Euclidean
    occupation (finite)."""
    zero = constant_field(disk128, 0.0)
    gamma, eps = 0.1, 2.0**-4
    clock = lbm.quantum_clock(path128, zero, gamma, eps)
    val = lbm.harmonic_extension_estimator(omega128, path128, clock, gamma, eps)
    assert np.isfinite(val)
    with pytest.raises(ParameterError):
        lbm.harmonic_extension_estimator(omega128, path128, clock, 0.0, eps)


def test_clock_domain_check(disk128):
    # a path that leaves the unit disk must be rejected
    xs = np.linspace(0.0, 1.2, 50)
    path = lbm.BrownianPath(
        times=np.arange(50, dtype=float) * 1e-4,
        positions=np.column_stack([xs, np.zeros_like(xs)]),
        dt=1e-4,
        stop_radius=0.5,
        domain_radius=1.0,
        exit_flag="inner",
    )
    field = sample_gff(disk128, seed=1)
    with pytest.raises(DomainError):
        lbm.quantum_clock(path, field, 0.5, 2.0**-4)
