"""Backend selection for the hot kernels.

The compiled extension is preferred; set LQGLAB_PURE_PYTHON=1 to force the
numpy fallback. Both backends consume identical random-number arrays in
identical per-walker order.
"""
import os

if os.environ.get("LQGLAB_PURE_PYTHON"):
    from . import _reference as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - build-environment dependent
        from . import _reference as _impl

BACKEND = _impl.BACKEND_NAME

srw_advance = _impl.srw_advance
wos_advance = _impl.wos_advance

__all__ = ["BACKEND", "srw_advance", "wos_advance"]
