"""Hot numeric kernels for n-gram coverage scoring.

Queries are pre-encoded into flat int64 arrays of hashed n-grams (sorted,
deduplicated per query and order). The coverage kernel then runs the
``(1/|B|) sum_b max_a sim(a, b)`` double loop over those arrays.

Two interchangeable backends exist: a numba ``@njit`` version (default) and a
pure-numpy version. Set ``COLLIDEKIT_NO_NUMBA=1`` in the environment to force
the numpy path; ``active_backend()`` reports which one is live. Both backends
execute the same floating-point operations in the same order, so results are
bit-identical.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "encode_queries",
    "coverage_pairs_numpy",
    "coverage_pairs",
    "active_backend",
    "hash_gram",
]

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def hash_gram(tokens: tuple[str, ...]) -> int:
    """Deterministic 64-bit FNV-1a hash of an n-gram, independent of PYTHONHASHSEED."""
    h = _FNV_OFFSET
    for tok in tokens:
        for byte in tok.encode("utf-8"):
            h = ((h ^ byte) * _FNV_PRIME) & _MASK64
        h = ((h ^ 0x1F) * _FNV_PRIME) & _MASK64
    # reinterpret as signed so it fits int64
    if h >= 1 << 63:
        h -= 1 << 64
    return h


def encode_queries(token_lists: list[list[str]], max_order: int):
    """Encode queries as hashed n-gram arrays for the coverage kernels.

    Returns ``(flat, offsets)`` where ``flat`` is int64 and ``offsets`` has
    shape ``(num_queries, max_order + 1)``; the grams of order ``n`` for query
    ``i`` live in ``flat[offsets[i, n-1]:offsets[i, n]]``, sorted ascending.
    """
    chunks: list[np.ndarray] = []
    offsets = np.zeros((len(token_lists), max_order + 1), dtype=np.int64)
    pos = 0
    for i, tokens in enumerate(token_lists):
        offsets[i, 0] = pos
        for n in range(1, max_order + 1):
            grams = {hash_gram(tuple(tokens[j:j + n]))
                     for j in range(len(tokens) - n + 1)}
            arr = np.sort(np.fromiter(grams, dtype=np.int64, count=len(grams)))
            chunks.append(arr)
            pos += len(arr)
            offsets[i, n] = pos
    flat = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return flat, offsets


def _sim_encoded_py(flat_a, off_a, ia, flat_b, off_b, ib, max_order):
    total = 0.0
    for n in range(max_order):
        a0, a1 = off_a[ia, n], off_a[ia, n + 1]
        b0, b1 = off_b[ib, n], off_b[ib, n + 1]
        na, nb = a1 - a0, b1 - b0
        if na == 0 and nb == 0:
            continue  # empty-vs-empty Jaccard is 0 by convention
        inter = 0
        i, j = a0, b0
        while i < a1 and j < b1:
            va, vb = flat_a[i], flat_b[j]
            if va == vb:
                inter += 1
                i += 1
                j += 1
            elif va < vb:
                i += 1
            else:
                j += 1
        union = na + nb - inter
        total += inter / union
    return total / max_order


def coverage_pairs_numpy(flat_a, off_a, flat_b, off_b, max_order: int) -> float:
    """Coverage of intent A over intent B: mean over b of max over a of sim(a, b)."""
    nb = off_b.shape[0]
    na = off_a.shape[0]
    acc = 0.0
    for ib in range(nb):
        best = 0.0
        for ia in range(na):
            s = _sim_encoded_py(flat_a, off_a, ia, flat_b, off_b, ib, max_order)
            if s > best:
                best = s
        acc += best
    return acc / nb


def _make_numba_kernel():
    from numba import njit

    @njit(cache=True)
    def _sim_encoded(flat_a, off_a, ia, flat_b, off_b, ib, max_order):
        total = 0.0
        for n in range(max_order):
            a0, a1 = off_a[ia, n], off_a[ia, n + 1]
            b0, b1 = off_b[ib, n], off_b[ib, n + 1]
            na, nb = a1 - a0, b1 - b0
            if na == 0 and nb == 0:
                continue
            inter = 0
            i, j = a0, b0
            while i < a1 and j < b1:
                va, vb = flat_a[i], flat_b[j]
                if va == vb:
                    inter += 1
                    i += 1
                    j += 1
                elif va < vb:
                    i += 1
                else:
                    j += 1
            union = na + nb - inter
            total += inter / union
        return total / max_order

    @njit(cache=True)
    def _coverage(flat_a, off_a, flat_b, off_b, max_order):
        nb = off_b.shape[0]
        na = off_a.shape[0]
        acc = 0.0
        for ib in range(nb):
            best = 0.0
            for ia in range(na):
                s = _sim_encoded(flat_a, off_a, ia, flat_b, off_b, ib, max_order)
                if s > best:
                    best = s
            acc += best
        return acc / nb

    return _coverage


_USE_NUMBA = os.environ.get("COLLIDEKIT_NO_NUMBA", "") not in ("1", "true", "yes")

if _USE_NUMBA:
    try:
        coverage_pairs = _make_numba_kernel()
        _BACKEND = "numba"
    except ImportError:
        coverage_pairs = coverage_pairs_numpy
        _BACKEND = "numpy"
else:
    coverage_pairs = coverage_pairs_numpy
    _BACKEND = "numpy"


def active_backend() -> str:
    return _BACKEND


_NUMBA_KERNEL = coverage_pairs if _BACKEND == "numba" else None


def get_kernel(backend: str):
    """Fetch a specific backend's coverage kernel (used by the benchmarks)."""
    global _NUMBA_KERNEL
    if backend == "numpy":
        return coverage_pairs_numpy
    if backend == "numba":
        if _NUMBA_KERNEL is None:
            _NUMBA_KERNEL = _make_numba_kernel()
        return _NUMBA_KERNEL
    raise ValueError(f"unknown backend {backend!r}")
