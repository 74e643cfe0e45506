"""Bit-identity of the compiled and pure-python kernel twins.

When only one backend is available the cross-checks are skipped; the
sanity checks still run against whichever backend was imported.
"""
import numpy as np
import pytest

from lqglab import _kernels

try:
    from lqglab._kernels import _fast
except ImportError:  # pragma: no cover
    _fast = None
from lqglab._kernels import _reference

needs_both = pytest.mark.skipif(_fast is None, reason="compiled backend unavailable")


def test_backend_name():
    assert _kernels.BACKEND in ("compiled", "python")


def test_srw_exit_semantics():
    dirs = np.zeros(10, dtype=np.uint8)  # ten +x steps
    xs, ys, exited = _kernels.srw_advance(dirs, 0, 0, 9)
    assert exited
    assert list(xs) == [1, 2, 3] and list(ys) == [0, 0, 0]
    xs, ys, exited = _kernels.srw_advance(dirs, 0, 0, 1000)
    assert not exited and len(xs) == 10 and xs[-1] == 10


@needs_both
def test_srw_backends_bit_identical():
    rng = np.random.default_rng(0)
    for trial in range(50):
        dirs = rng.integers(0, 4, size=4096).astype(np.uint8)
        x0, y0 = int(rng.integers(-5, 6)), int(rng.integers(-5, 6))
        a = _fast.srw_advance(dirs, x0, y0, 900)
        b = _reference.srw_advance(dirs, x0, y0, 900)
        assert a[2] == b[2]
        assert np.array_equal(np.asarray(a[0]), np.asarray(b[0]))
        assert np.array_equal(np.asarray(a[1]), np.asarray(b[1]))


def _wos_inputs(seed, walkers=512, steps=64, n=64):
    rng = np.random.default_rng(seed)
    # a synthetic distance field: distance to a blob near the origin
    m = 2 * n
    ax = (np.arange(m) + 0.5) / n - 1.0
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    dist = np.maximum(np.hypot(X - 0.05, Y + 0.1) - 0.15, 0.0)
    r = 0.55 + 0.35 * rng.random(walkers)
    th = 2 * np.pi * rng.random(walkers)
    px, py = r * np.cos(th), r * np.sin(th)
    status = np.zeros(walkers, dtype=np.int8)
    theta = 2 * np.pi * rng.random((walkers, steps))
    args = dict(
        origin=-1.0,
        pixel=1.0 / n,
        safety=0.75 / n,
        capture=2.0 / n,
        boundary_band=2.0 / n,
        cos_t=np.cos(theta),
        sin_t=np.sin(theta),
    )
    return dist, px, py, status, args


@needs_both
def test_wos_backends_bit_identical():
    for seed in range(5):
        dist, px, py, status, args = _wos_inputs(seed)
        px2, py2, status2 = px.copy(), py.copy(), status.copy()
        _fast.wos_advance(px, py, status, dist, **args)
        _reference.wos_advance(px2, py2, status2, dist, **args)
        assert np.array_equal(status, status2)
        assert np.array_equal(px, px2), np.abs(px - px2).max()
        assert np.array_equal(py, py2)


def test_wos_terminates_walkers():
    dist, px, py, status, args = _wos_inputs(7, walkers=2048, steps=512)
    _kernels.wos_advance(px, py, status, dist, **args)
    done = status != 0
    assert done.mean() > 0.99
    # captured walkers stop near the blob, escaped ones near the circle
    r = np.hypot(px, py)
    assert np.all(r[status == 2] > 1.0 - 3 * args["boundary_band"])
