"""Hot-kernel dispatch: compiled Cython core with a pure-Python fallback.

Import-time selection; ``BACKEND`` names the active implementation and
``available_backends()`` returns every importable one (used by the
benchmark and the parity tests).
"""

from . import _fallback

try:
    from . import _core as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _fallback
    BACKEND = "python"

min_dists = _impl.min_dists
triangles = _impl.triangles


def available_backends() -> dict:
    """Name -> module for every importable kernel backend."""
    out = {"python": _fallback}
    if BACKEND == "compiled":
        out["compiled"] = _impl
    return out
