"""Similarity kernels (exact and hash-estimated) and score normalizers.

Sparse vectors are ``{term_id: weight}`` mappings or anything with ``terms``
and ``weights`` arrays (see :class:`codicil.textindex.WeightedVector`).
Vertex sets are iterables of non-negative integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import _accel
from ._accel.numpy_impl import _normalize, mix64

DEFAULT_HASHES = 30
DEFAULT_BITS = 512

ZERO_ONE = "zero-one"
Z_NORM = "z-norm"
NORMALIZERS = {ZERO_ONE: 0, Z_NORM: 1}


def _as_sorted_items(x) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, Mapping):
        terms = np.fromiter(x.keys(), dtype=np.int64, count=len(x))
        vals = np.fromiter(x.values(), dtype=np.float64, count=len(x))
    else:
        terms = np.asarray(x.terms, dtype=np.int64)
        vals = np.asarray(x.weights, dtype=np.float64)
    order = np.argsort(terms, kind="stable")
    terms, vals = terms[order], vals[order]
    nz = vals != 0
    return terms[nz], vals[nz]


def _as_sorted_set(a: Iterable[int]) -> np.ndarray:
    arr = np.asarray(a if isinstance(a, np.ndarray) else list(a), dtype=np.int64).reshape(-1)
    return np.unique(arr)


def _seqsum(x: np.ndarray) -> float:
    return float(np.cumsum(x)[-1]) if x.size else 0.0


def vector_norm(x) -> float:
    _, vals = _as_sorted_items(x)
    return math.sqrt(_seqsum(vals * vals))


def cosine(x, y) -> float:
    """x.y / (|x| |y|); 0 when either vector is zero."""
    tx, vx = _as_sorted_items(x)
    ty, vy = _as_sorted_items(y)
    nx = math.sqrt(_seqsum(vx * vx))
    ny = math.sqrt(_seqsum(vy * vy))
    if nx == 0.0 or ny == 0.0:
        return 0.0
    _, ix, iy = np.intersect1d(tx, ty, assume_unique=True, return_indices=True)
    return _seqsum(vx[ix] * vy[iy]) / (nx * ny)


def jaccard(a: Iterable[int], b: Iterable[int]) -> float:
    """|A & B| / |A | B|; 0 when both sets are empty."""
    sa, sb = _as_sorted_set(a), _as_sorted_set(b)
    inter = np.intersect1d(sa, sb, assume_unique=True).size
    union = sa.size + sb.size - inter
    return inter / union if union else 0.0


# -- minwise hashing ---------------------------------------------------------

def minhash_params(h: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Odd multipliers and offsets of ``h`` multiply-add hashes over 64-bit words.

    Each hash is ``x -> a * mix64(x) + b (mod 2**64)``, a bijection of the
    64-bit domain, so it acts as a permutation of any id universe.
    """
    if h < 1:
        raise ValueError("h must be positive")
    rng = np.random.default_rng(seed)
    mult = rng.integers(0, 2**64, size=h, dtype=np.uint64, endpoint=False) | np.uint64(1)
    add = rng.integers(0, 2**64, size=h, dtype=np.uint64, endpoint=False)
    return mult, add


@dataclass(frozen=True, eq=False)
class MinHashSignature:
    values: np.ndarray
    seed: int

    @property
    def h(self) -> int:
        return int(self.values.size)

    def __eq__(self, other):
        return (isinstance(other, MinHashSignature) and self.seed == other.seed
                and np.array_equal(self.values, other.values))


def minhash_matrix(indptr, indices, h: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Signatures for every CSR row; ``valid`` is False for empty rows."""
    mult, add = minhash_params(h, seed)
    sig = _accel.minhash_rows(np.asarray(indptr, np.int64), np.asarray(indices, np.int64), mult, add)
    return sig, np.diff(indptr) > 0


def minhash_signature(a: Iterable[int], h: int = DEFAULT_HASHES, seed: int = 0) -> MinHashSignature:
    s = _as_sorted_set(a)
    if s.size == 0:
        raise ValueError("cannot take a minhash signature of an empty set")
    sig, _ = minhash_matrix(np.array([0, s.size]), s, h, seed)
    return MinHashSignature(sig[0], seed)


def estimate_jaccard(sa: MinHashSignature, sb: MinHashSignature) -> float:
    if sa.h != sb.h or sa.seed != sb.seed:
        raise ValueError(f"incompatible signatures (h={sa.h}/{sb.h}, seed={sa.seed}/{sb.seed})")
    return int(np.count_nonzero(sa.values == sb.values)) / sa.h


# -- random projections ------------------------------------------------------

def projection_key(seed: int) -> int:
    return int(mix64(np.array([seed], dtype=np.uint64))[0])


@dataclass(frozen=True, eq=False)
class SimHashSignature:
    bits: np.ndarray
    seed: int

    @property
    def b(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other):
        return (isinstance(other, SimHashSignature) and self.seed == other.seed
                and np.array_equal(self.bits, other.bits))


def simhash_matrix(indptr, indices, data, bits: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Sign bits of ``bits`` random +/-1 projections per CSR row.

    Projection entries are derived by hashing ``(seed, bit, term)`` so the
    projection matrix is never materialized. Zero rows are flagged invalid.
    """
    if bits < 1:
        raise ValueError("bits must be positive")
    indptr = np.asarray(indptr, np.int64)
    data = np.asarray(data, np.float64)
    sig = _accel.simhash_rows(indptr, np.asarray(indices, np.int64), data, np.uint64(projection_key(seed)), bits)
    nonzero = np.zeros(indptr.size - 1, dtype=bool)
    rows = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    nonzero[rows[data != 0]] = True
    return sig, nonzero


def simhash_signature(x, b: int = DEFAULT_BITS, seed: int = 0) -> SimHashSignature:
    terms, vals = _as_sorted_items(x)
    if terms.size == 0:
        raise ValueError("cannot take a simhash signature of a zero vector")
    sig, _ = simhash_matrix(np.array([0, terms.size]), terms, vals, b, seed)
    return SimHashSignature(sig[0], seed)


def cosine_from_agreement(fraction: float) -> float:
    return math.cos(math.pi * (1.0 - fraction))


def estimate_cosine(sa: SimHashSignature, sb: SimHashSignature) -> float:
    if sa.b != sb.b or sa.seed != sb.seed:
        raise ValueError(f"incompatible signatures (b={sa.b}/{sb.b}, seed={sa.seed}/{sb.seed})")
    agree = int(np.count_nonzero(sa.bits == sb.bits)) / sa.b
    return cosine_from_agreement(agree)


# -- normalizers -------------------------------------------------------------

def zero_one_normalize(s) -> np.ndarray:
    """Rescale to [0, 1]; a constant vector maps to 0.5 everywhere."""
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0:
        raise ValueError("cannot normalize an empty vector")
    return _normalize(s, 0)


def z_normalize(s) -> np.ndarray:
    """Zero mean, unit sample variance; a constant vector maps to zeros."""
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0:
        raise ValueError("cannot normalize an empty vector")
    return _normalize(s, 1)


def normalize(s, kind: str) -> np.ndarray:
    if kind == ZERO_ONE:
        return zero_one_normalize(s)
    if kind == Z_NORM:
        return z_normalize(s)
    raise ValueError(f"unknown normalizer {kind!r}")
