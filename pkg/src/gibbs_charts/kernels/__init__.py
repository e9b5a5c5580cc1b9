"""Hot kernels: compiled extension when available, numpy fallback otherwise.

Set ``GIBBS_CHARTS_PURE=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("GIBBS_CHARTS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

adjoint_step = _impl.adjoint_step
transfer_step = _impl.transfer_step
trig_eval = _impl.trig_eval
stable_series = _impl.stable_series

__all__ = ["BACKEND", "adjoint_step", "transfer_step", "trig_eval", "stable_series"]
