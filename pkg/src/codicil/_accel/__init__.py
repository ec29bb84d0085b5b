"""Kernel dispatch.

The numba kernels are used when numba imports and ``CODICIL_DISABLE_NUMBA``
is unset (or falsy). Otherwise the pure-numpy kernels are used. Both produce
identical outputs.
"""
from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

KERNEL_NAMES = (
    "minhash_rows",
    "simhash_rows",
    "pair_cosine",
    "pair_jaccard",
    "pair_agreement",
    "topk_cosine",
    "select_edges",
    "label_propagation",
    "row_sqnorms",
)


def _disabled() -> bool:
    return os.environ.get("CODICIL_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


if _disabled():
    from . import numpy_impl as _impl

    BACKEND = "numpy"
else:
    try:
        from . import jit as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency in practice
        logger.warning("numba unavailable; using numpy kernels")
        from . import numpy_impl as _impl

        BACKEND = "numpy"

minhash_rows = _impl.minhash_rows
simhash_rows = _impl.simhash_rows
pair_cosine = _impl.pair_cosine
pair_jaccard = _impl.pair_jaccard
pair_agreement = _impl.pair_agreement
topk_cosine = _impl.topk_cosine
select_edges = _impl.select_edges
label_propagation = _impl.label_propagation
row_sqnorms = _impl.row_sqnorms


def set_threads(n: int) -> int:
    """Bound kernel parallelism; returns the thread count actually applied."""
    if BACKEND != "numba":
        return 1
    import numba

    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def backend_module(name: str):
    """Return the kernel module for ``"numba"`` or ``"numpy"`` regardless of the env flag."""
    if name == "numba":
        from . import jit

        return jit
    if name == "numpy":
        from . import numpy_impl

        return numpy_impl
    raise ValueError(f"unknown kernel backend {name!r}")
