"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The compiled extension ``cmequi._kernels`` is used when importable; setting
``CMEQUI_PURE_PYTHON=1`` forces the fallback. Both backends return identical
exact integers.
"""

from __future__ import annotations

import os
from math import isqrt

import numpy as np

from . import _pykernels

_compiled = None
if not os.environ.get("CMEQUI_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND: str = _impl.BACKEND

_INT64_SAFE = 2**62


def backend(name: str | None = None):
    """Kernel module by name ('cython' or 'python'); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


_spf = np.zeros(2, dtype=np.int32)


def spf_table(limit: int) -> np.ndarray:
    """Smallest-prime-factor table covering 0..limit (grown and reused)."""
    global _spf
    if len(_spf) > limit:
        return _spf
    size = max(limit + 1, 2 * len(_spf))
    spf = np.zeros(size, dtype=np.int32)
    for p in range(2, isqrt(size - 1) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    _spf = spf
    return spf


def _form_limit(d: int) -> int:
    return (-d // 3 - d) // 4 + 1


def count_reduced_forms(d: int, impl=None) -> int:
    impl = impl or _impl
    return impl.count_reduced_forms(d, spf_table(_form_limit(d)))


def class_numbers(ds, impl=None) -> list[int]:
    impl = impl or _impl
    ds = [int(d) for d in ds]
    if not ds:
        return []
    spf = spf_table(_form_limit(min(ds)))
    return impl.class_numbers(np.asarray(ds, dtype=np.int64), spf)


def ternary_fits_int64(B, bound: int) -> bool:
    b00, b11 = B[0][0], B[1][1]
    t11 = b00 * b11 - B[0][1] ** 2
    detB = (B[0][0] * (B[1][1] * B[2][2] - B[1][2] ** 2) - B[0][1] * (B[0][1] * B[2][2] - B[1][2] * B[0][2])
            + B[0][2] * (B[0][1] * B[1][2] - B[1][1] * B[0][2]))
    big = max(abs(x) for row in B for x in row)
    T = 2 * bound
    worst = max(t11 * b00 * T, b00 * detB * (t11 * T // detB + 1), (b00 * big * 4 * T) ** 2, big**4 * 16 * T)
    return worst < _INT64_SAFE


def ternary_theta(B, bound: int, impl=None):
    """``(r, r_star)`` for the form x^T B x / 2; falls back to Python ints on overflow risk."""
    impl = impl or _impl
    if impl is not _pykernels and not ternary_fits_int64(B, bound):
        impl = _pykernels
    return impl.ternary_theta(B, bound)
