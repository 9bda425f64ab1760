"""Backend selection for the accumulation kernels.

The compiled extension is preferred; set ``BOHMPAIR_BACKEND=python`` to force
the numpy fallback. Both expose ``grid_pass``, ``points_pass`` and
``evaluate_points`` with identical array contracts.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


def get_backend(name: str | None = None):
    name = name or os.environ.get("BOHMPAIR_BACKEND") or ("cython" if _compiled else "python")
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def default_backend_name() -> str:
    return os.environ.get("BOHMPAIR_BACKEND") or ("cython" if _compiled else "python")
