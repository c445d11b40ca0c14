"""Kernel backend selection.

The distance-accumulation inner loop and FNV hashing ship both as a
compiled Cython extension and as a pure-numpy fallback. The compiled
backend is used when the extension imported successfully; set the
environment variable ``LANGSEP_PURE=1`` (or call :func:`use`) to force
the fallback. Both backends are individually deterministic; they may
differ from each other in the last floating-point bit because their
summation orders differ.
"""

import os

from langsep.kernels import pure as _pure

try:
    from langsep.kernels import _core as _compiled
except ImportError:
    _compiled = None

if os.environ.get("LANGSEP_PURE", "") not in ("", "0"):
    _impl = _pure
else:
    _impl = _compiled if _compiled is not None else _pure


def use(name):
    """Switch backend: "compiled" or "pure". Raises if unavailable."""
    global _impl
    if name == "pure":
        _impl = _pure
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel extension is not available")
        _impl = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def backend_name():
    return "compiled" if _impl is _compiled else "pure"


def compiled_available():
    return _compiled is not None


def accumulate_block(gram, row_sq_norms, col_sq_norms, col_langs,
                     row_start, col_start, acc):
    _impl.accumulate_block(gram, row_sq_norms, col_sq_norms, col_langs,
                           row_start, col_start, acc)


def fnv1a64(data):
    return _impl.fnv1a64(data)
