"""Adaptive linear-ODE kernel with compiled/pure twin implementations.

``solve(mats, coeff_fn, y0, t0, t1, rtol, atol)`` integrates
dy/dt = sum_i c_i(t) M_i y for sparse matrices ``mats`` (scipy CSR) and a
coefficient callback ``coeff_fn(t) -> tuple[float, ...]``.

The compiled Cython kernel is preferred when built; setting the environment
variable ``VACUUMPROBE_PURE=1`` (or a failed extension import) selects the
numpy fallback.  Both are exercised against each other in the test suite and
in ``benchmarks/kernel_bench.py``.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.sparse import csr_matrix

from . import _pure

try:
    from . import _fast_ode
except ImportError:  # extension not built
    _fast_ode = None

if os.environ.get("VACUUMPROBE_PURE") == "1" or _fast_ode is None:
    IMPLEMENTATION = "pure"
else:
    IMPLEMENTATION = "cython"


def _as_csr_arrays(mat):
    m = csr_matrix(mat)
    return (
        np.ascontiguousarray(m.data, dtype=np.complex128),
        np.ascontiguousarray(m.indices, dtype=np.int32),
        np.ascontiguousarray(m.indptr, dtype=np.int32),
    )


def prepare_mats(mats, implementation: str | None = None):
    """Preprocess matrices once for repeated ``solve`` calls."""
    impl = implementation or IMPLEMENTATION
    if impl == "cython":
        return [_as_csr_arrays(m) for m in mats]
    return [csr_matrix(m) for m in mats]


def solve(mats, coeff_fn, y0, t0, t1, rtol, atol, max_steps=2_000_000,
          implementation: str | None = None, prepared=None):
    impl = implementation or IMPLEMENTATION
    ms = prepared if prepared is not None else prepare_mats(mats, impl)
    if impl == "cython":
        if _fast_ode is None:
            raise RuntimeError("compiled kernel requested but not built")
        return _fast_ode.solve(ms, coeff_fn, np.asarray(y0, dtype=complex), t0, t1,
                               rtol, atol, max_steps)
    return _pure.solve(ms, coeff_fn, np.asarray(y0, dtype=complex), t0, t1,
                       rtol, atol, max_steps)
