"""Phrase similarity kernels: n-gram Jaccard and cosine over stored embeddings.

The embedding matrix file is little-endian: magic ``EMB1``, u32 version=1,
u32 dim, u64 count, then count*dim float32 values row-major. The companion
index is JSONL with one ``{"row": i, "id": ...}`` object per matrix row.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Query

__all__ = [
    "NGramConfig",
    "NGramSet",
    "EmbeddingStore",
    "SimilarityKind",
    "SimilarityError",
    "tokenize",
    "ngram_set",
    "jaccard",
    "ngram_similarity",
    "cosine",
    "load_embeddings",
    "save_embeddings",
    "sim",
]

EMB_MAGIC = b"EMB1"
EMB_VERSION = 1


class SimilarityError(ValueError):
    pass


@dataclass(frozen=True)
class NGramConfig:
    max_order: int = 3

    def __post_init__(self):
        if self.max_order < 1:
            raise SimilarityError("max_order must be >= 1")


@dataclass(frozen=True)
class NGramSet:
    order: int
    grams: frozenset[tuple[str, ...]]


@dataclass
class EmbeddingStore:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, query_id: str) -> bool:
        return query_id in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class SimilarityKind:
    """Dispatch tag: kind of similarity plus whatever that kind needs."""
    kind: str  # "ngram" | "embedding_cosine"
    ngram: NGramConfig | None = None
    store: EmbeddingStore | None = None

    @staticmethod
    def for_ngram(cfg: NGramConfig | None = None) -> "SimilarityKind":
        return SimilarityKind(kind="ngram", ngram=cfg or NGramConfig())

    @staticmethod
    def for_embeddings(store: EmbeddingStore) -> "SimilarityKind":
        return SimilarityKind(kind="embedding_cosine", store=store)


def tokenize(norm_text: str) -> list[str]:
    """Split normalized text on spaces; empty string gives an empty list."""
    return norm_text.split(" ") if norm_text else []


def ngram_set(tokens: list[str], n: int) -> NGramSet:
    if n < 1:
        raise SimilarityError("n must be >= 1")
    grams = frozenset(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return NGramSet(order=n, grams=grams)


def jaccard(s1: NGramSet, s2: NGramSet) -> float:
    """|intersection| / |union|; 0.0 when both sets are empty."""
    if s1.order != s2.order:
        raise SimilarityError(f"order mismatch: {s1.order} != {s2.order}")
    if not s1.grams and not s2.grams:
        return 0.0
    inter = len(s1.grams & s2.grams)
    union = len(s1.grams | s2.grams)
    return inter / union


def ngram_similarity(a: Query, b: Query, cfg: NGramConfig | None = None) -> float:
    """Mean over n=1..N of per-order Jaccard between the two queries' n-gram sets."""
    cfg = cfg or NGramConfig()
    ta = tokenize(a.norm_text)
    tb = tokenize(b.norm_text)
    total = 0.0
    for n in range(1, cfg.max_order + 1):
        total += jaccard(ngram_set(ta, n), ngram_set(tb, n))
    return total / cfg.max_order


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    if u.shape != v.shape:
        raise SimilarityError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise SimilarityError("zero-norm vector")
    return float(np.dot(u, v)) / (nu * nv)


def load_embeddings(matrix_path: str | Path, index_path: str | Path) -> EmbeddingStore:
    matrix_path = Path(matrix_path)
    index_path = Path(index_path)
    with open(matrix_path, "rb") as fh:
        header = fh.read(20)
        if len(header) < 20:
            raise SimilarityError(f"{matrix_path}: truncated header")
        magic, version, dim, count = struct.unpack("<4sIIQ", header)
        if magic != EMB_MAGIC:
            raise SimilarityError(f"{matrix_path}: bad magic {magic!r}")
        if version != EMB_VERSION:
            raise SimilarityError(f"{matrix_path}: unsupported version {version}")
        data = np.fromfile(fh, dtype="<f4")
    if data.size != count * dim:
        raise SimilarityError(
            f"{matrix_path}: expected {count * dim} floats, found {data.size}")
    if not np.all(np.isfinite(data)):
        raise SimilarityError(f"{matrix_path}: matrix contains NaN/Inf")
    matrix = data.reshape(count, dim)

    ids: list[str] = []
    with open(index_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("row") != len(ids):
                raise SimilarityError(f"{index_path}:{lineno}: rows out of order")
            ids.append(obj["id"])
    if len(ids) != count:
        raise SimilarityError(
            f"index lists {len(ids)} ids but matrix header says count={count}")
    if len(set(ids)) != len(ids):
        raise SimilarityError(f"{index_path}: duplicate id in index")

    vectors = {qid: matrix[i] for i, qid in enumerate(ids)}
    return EmbeddingStore(dim=int(dim), vectors=vectors)


def save_embeddings(store: EmbeddingStore, matrix_path: str | Path,
                    index_path: str | Path, ids: list[str] | None = None) -> None:
    """Write the store back out in the binary matrix + JSONL index formats."""
    ids = ids if ids is not None else list(store.vectors.keys())
    with open(matrix_path, "wb") as fh:
        fh.write(struct.pack("<4sIIQ", EMB_MAGIC, EMB_VERSION, store.dim, len(ids)))
        for qid in ids:
            store.vectors[qid].astype("<f4").tofile(fh)
    with open(index_path, "w", encoding="utf-8") as fh:
        for i, qid in enumerate(ids):
            fh.write(json.dumps({"row": i, "id": qid}, ensure_ascii=False) + "\n")


def sim(a: Query, b: Query, kind: SimilarityKind) -> float:
    """Similarity dispatch; arguments are canonicalized by query id for symmetry."""
    if b.id < a.id:
        a, b = b, a
    if kind.kind == "ngram":
        return ngram_similarity(a, b, kind.ngram)
    if kind.kind == "embedding_cosine":
        store = kind.store
        assert store is not None
        for q in (a, b):
            if q.id not in store:
                raise SimilarityError(f"missing embedding for query id {q.id!r}")
        return cosine(store.vectors[a.id], store.vectors[b.id])
    raise SimilarityError(f"unknown similarity kind {kind.kind!r}")
