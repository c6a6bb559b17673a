"""Hot kernels for routing cost and annealing.

The compiled ``_core`` extension is used when it is importable; otherwise the
pure-Python ``_fallback`` is.  Set ``ZONED_COMPILER_PURE=1`` to force the
fallback.  Both produce identical results for identical inputs.
"""

import os

from . import _fallback
from ._fallback import STAGE_MOVE_P, RoutingError

_impl = _fallback
BACKEND = "python"
if os.environ.get("ZONED_COMPILER_PURE") != "1":
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

route_transition = _impl.route_transition
transition_cost = _impl.transition_cost
anneal_sweep = _impl.anneal_sweep


def backend_module(name: str):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "BACKEND",
    "STAGE_MOVE_P",
    "RoutingError",
    "anneal_sweep",
    "backend_module",
    "route_transition",
    "transition_cost",
]
