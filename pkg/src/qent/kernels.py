"""Backend selection for the mod-p elimination kernels.

The compiled extension is used when it imports; set ``QENT_PURE_PYTHON=1``
to force the numpy fallback (the benchmark and the kernel tests do this).
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("QENT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def rref_modp(a, p: int):
    return _impl.rref_modp(a, p)


def rank_modp(a, p: int) -> int:
    return _impl.rank_modp(a, p)


def matmul_modp(a, b, p: int):
    return _impl.matmul_modp(a, b, p)


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
