"""Classifier-confusion collision detection.

A one-vs-rest linear classifier (hinge loss, seeded SGD) is trained on one
dataset's bag-of-words features. Running a candidate intent from another
dataset through it yields a distribution of predicted labels; the collision
score is how concentrated that distribution is: ``max(d) / sum(d)``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Intent, normalize_text
from .similarity import EMB_MAGIC, EMB_VERSION
from .similarity import tokenize

__all__ = [
    "BowVocabulary",
    "ConfusionConfig",
    "LinearModel",
    "ClassificationDistribution",
    "build_vocab",
    "featurize",
    "train_classifier",
    "predict",
    "classification_distribution",
    "collision_score",
    "detect_collision_confusion",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class BowVocabulary:
    index: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.index)


@dataclass(frozen=True)
class ConfusionConfig:
    tau: float = 0.5
    epochs: int = 10
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 13

    def __post_init__(self):
        if not (0.0 < self.tau <= 1.0):
            raise ValueError("tau must lie in (0, 1]")


@dataclass
class LinearModel:
    labels: list[str]
    weights: np.ndarray  # (n_labels, vocab_size)
    biases: np.ndarray   # (n_labels,)
    vocab: BowVocabulary
    trained_on: str
    seed: int


@dataclass(frozen=True)
class ClassificationDistribution:
    counts: dict[str, int]

    def total(self) -> int:
        return sum(self.counts.values())


def build_vocab(corpus: Corpus) -> BowVocabulary:
    """One column per distinct normalized token, indices in lexicographic order."""
    terms: set[str] = set()
    for q in corpus.all_queries():
        terms.update(tokenize(q.norm_text))
    if not terms:
        raise ValueError(f"corpus {corpus.dataset_id!r} has no tokens")
    return BowVocabulary(index={t: i for i, t in enumerate(sorted(terms))})


def featurize(text: str, vocab: BowVocabulary) -> list[tuple[int, int]]:
    """Sparse (column, count) pairs with strictly increasing columns; OOV dropped."""
    counts: dict[int, int] = {}
    for tok in tokenize(normalize_text(text)):
        col = vocab.index.get(tok)
        if col is not None:
            counts[col] = counts.get(col, 0) + 1
    return sorted(counts.items())


def train_classifier(corpus: Corpus, cfg: ConfusionConfig | None = None) -> LinearModel:
    """One-vs-rest hinge-loss SGD over bag-of-words counts; bit-deterministic per seed."""
    cfg = cfg or ConfusionConfig()
    if len(corpus.intents) < 2:
        raise ValueError("training requires at least 2 intents")
    vocab = build_vocab(corpus)
    labels = list(corpus.intents.keys())
    label_idx = {name: i for i, name in enumerate(labels)}

    samples: list[tuple[np.ndarray, np.ndarray, int]] = []
    for name, intent in corpus.intents.items():
        y = label_idx[name]
        for q in intent.queries:
            feats = featurize(q.text, vocab)
            cols = np.array([c for c, _ in feats], dtype=np.int64)
            cnts = np.array([v for _, v in feats], dtype=np.float64)
            samples.append((cols, cnts, y))

    n_labels = len(labels)
    raw = np.zeros((n_labels, vocab.size), dtype=np.float64)
    biases = np.zeros(n_labels, dtype=np.float64)
    scale = 1.0
    rng = np.random.default_rng(cfg.seed)
    t = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(len(samples))
        for si in order:
            cols, cnts, y = samples[si]
            t += 1
            eta = cfg.learning_rate / (1.0 + cfg.learning_rate * cfg.l2 * t)
            # L2 shrinkage via the running scale factor (weights only, not biases)
            scale *= 1.0 - eta * cfg.l2
            if cols.size:
                scores = scale * (raw[:, cols] @ cnts) + biases
            else:
                scores = biases.copy()
            signs = np.full(n_labels, -1.0)
            signs[y] = 1.0
            violating = signs * scores < 1.0
            if np.any(violating):
                g = eta * signs[violating]
                if cols.size:
                    raw[np.ix_(violating, cols)] += np.outer(g, cnts) / scale
                biases[violating] += g
    return LinearModel(labels=labels, weights=scale * raw, biases=biases,
                       vocab=vocab, trained_on=corpus.dataset_id, seed=cfg.seed)


def _scores(model: LinearModel, text: str) -> np.ndarray:
    feats = featurize(text, model.vocab)
    if not feats:
        return model.biases.copy()
    cols = np.array([c for c, _ in feats], dtype=np.int64)
    cnts = np.array([v for _, v in feats], dtype=np.float64)
    return model.weights[:, cols] @ cnts + model.biases


def predict(model: LinearModel, text: str) -> str:
    """Argmax label; ties break toward the earlier training label."""
    return model.labels[int(np.argmax(_scores(model, text)))]


def classification_distribution(model: LinearModel, candidate: Intent) -> ClassificationDistribution:
    if len(candidate) == 0:
        raise ValueError("empty candidate intent")
    if candidate.dataset_id == model.trained_on:
        raise ValueError(
            f"candidate {candidate.name!r} belongs to the training dataset "
            f"{model.trained_on!r}")
    counts: dict[str, int] = {}
    for q in candidate.queries:
        label = predict(model, q.text)
        counts[label] = counts.get(label, 0) + 1
    return ClassificationDistribution(counts=counts)


def collision_score(d: ClassificationDistribution) -> float:
    total = d.total()
    if total == 0:
        raise ValueError("empty classification distribution")
    return max(d.counts.values()) / total


def detect_collision_confusion(model: LinearModel, candidate: Intent,
                               cfg: ConfusionConfig) -> tuple[bool, str, float]:
    d = classification_distribution(model, candidate)
    score = collision_score(d)
    # argmax in training-label order for deterministic ties
    target = max((label for label in model.labels if label in d.counts),
                 key=lambda label: (d.counts[label], -model.labels.index(label)))
    return score > cfg.tau, target, score


def save_model(model: LinearModel, header_path: str | Path, matrix_path: str | Path) -> None:
    """JSON header plus float32 weight matrix in the embedding binary layout."""
    header = {
        "labels": model.labels,
        "trained_on": model.trained_on,
        "seed": model.seed,
        "vocab": sorted(model.vocab.index, key=model.vocab.index.get),
        "biases": [float(b) for b in model.biases],
        "matrix": str(Path(matrix_path).name),
    }
    with open(header_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    with open(matrix_path, "wb") as fh:
        fh.write(struct.pack("<4sIIQ", EMB_MAGIC, EMB_VERSION,
                             model.vocab.size, len(model.labels)))
        model.weights.astype("<f4").tofile(fh)


def load_model(header_path: str | Path, matrix_path: str | Path) -> LinearModel:
    with open(header_path, encoding="utf-8") as fh:
        header = json.load(fh)
    with open(matrix_path, "rb") as fh:
        magic, version, dim, count = struct.unpack("<4sIIQ", fh.read(20))
        if magic != EMB_MAGIC or version != EMB_VERSION:
            raise ValueError(f"{matrix_path}: bad model matrix header")
        data = np.fromfile(fh, dtype="<f4")
    labels = header["labels"]
    if data.size != count * dim or count != len(labels):
        raise ValueError(f"{matrix_path}: weight matrix shape mismatch")
    vocab = BowVocabulary(index={t: i for i, t in enumerate(header["vocab"])})
    return LinearModel(
        labels=labels,
        weights=data.reshape(count, dim).astype(np.float64),
        biases=np.array(header["biases"], dtype=np.float64),
        vocab=vocab,
        trained_on=header["trained_on"],
        seed=header["seed"],
    )
