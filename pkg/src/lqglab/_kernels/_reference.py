"""Pure-numpy implementations of the hot kernels.

These are the fallback twins of the compiled extension; both consume the
same pre-generated random arrays in the same (walker, step) order, so the
two backends produce matching trajectories.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_DX = np.array([1, -1, 0, 0], dtype=np.int64)
_DY = np.array([0, 0, 1, -1], dtype=np.int64)


def srw_advance(dirs: np.ndarray, x0: int, y0: int, max_r2: int):
    """Advance a simple random walk through a chunk of direction draws.

    ``dirs`` are uint8 codes (0:+x, 1:-x, 2:+y, 3:-y). Returns the visited
    positions up to and including the first site with x^2+y^2 >= max_r2,
    and whether the walk exited within the chunk.
    """
    xs = x0 + np.cumsum(_DX[dirs])
    ys = y0 + np.cumsum(_DY[dirs])
    r2 = xs * xs + ys * ys
    hit = r2 >= max_r2
    if hit.any():
        k = int(np.argmax(hit))
        return xs[: k + 1], ys[: k + 1], True
    return xs, ys, False


def _bilin(a, fx, fy):
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


def wos_advance(
    px: np.ndarray,
    py: np.ndarray,
    status: np.ndarray,
    dist: np.ndarray,
    origin: float,
    pixel: float,
    safety: float,
    capture: float,
    boundary_band: float,
    cos_t: np.ndarray,
    sin_t: np.ndarray,
) -> None:
    """One chunk of walk-on-spheres steps, in place.

    status: 0 active, 1 captured by the range tube, 2 hit the unit circle.
    ``cos_t``/``sin_t`` have shape (walkers, steps) and hold the step
    directions; walker w consumes column k at its k-th step of this chunk.
    The trig tables are built by the caller so both backends see the same
    bits.
    """
    for k in range(cos_t.shape[1]):
        act = np.nonzero(status == 0)[0]
        if act.size == 0:
            return
        x, y = px[act], py[act]
        d = _bilin(dist, (x - origin) / pixel - 0.5, (y - origin) / pixel - 0.5) - safety
        rb = 1.0 - np.sqrt(x * x + y * y)
        hb = rb <= boundary_band
        hr = ~hb & (d <= capture)
        status[act[hb]] = 2
        status[act[hr]] = 1
        mv = ~(hb | hr)
        idx = act[mv]
        if idx.size:
            jump = np.minimum(d[mv], rb[mv])
            px[idx] = x[mv] + jump * cos_t[idx, k]
            py[idx] = y[mv] + jump * sin_t[idx, k]
