"""Backend selection for the hot kernels.

The compiled extension is used when importable; ``EXAMTT_BACKEND=python``
forces the pure-Python fallback.
"""

import importlib
import os

_NAMES = {"cython": "examtt._ckernels", "python": "examtt._pykernels"}


def load_backend(name):
    return importlib.import_module(_NAMES[name])


def _select():
    forced = os.environ.get("EXAMTT_BACKEND", "").strip().lower()
    if forced in ("python", "py", "pure"):
        return "python", load_backend("python")
    try:
        return "cython", load_backend("cython")
    except ImportError:
        if forced == "cython":
            raise
        return "python", load_backend("python")


BACKEND, _impl = _select()

Rng = _impl.Rng
init_tables = _impl.init_tables
apply_move = _impl.apply_move
vdls = _impl.vdls
hhls = _impl.hhls
construct = _impl.construct
decode = _impl.decode
LLH4_REINSERT = _impl.LLH4_REINSERT
LLH4_MERGE = _impl.LLH4_MERGE
