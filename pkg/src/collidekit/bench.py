"""Intent-classification benchmark over a merged corpus.

A bag-of-words softmax classifier stands in for large transformer models;
externally computed confidences can be imported instead via a score file, so
the metrics here (in-scope accuracy, OOS AUC, per-collision-degree accuracy)
apply to either.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .confusion import BowVocabulary, build_vocab, featurize
from .corpus import Corpus
from .evaluation import auc
from .graph import CollisionGraph, IntentRef
from .merge import OOSSet

__all__ = [
    "ProbModel",
    "BenchConfig",
    "BenchReport",
    "train_softmax",
    "predict_proba",
    "decide",
    "in_scope_accuracy",
    "oos_auc",
    "accuracy_by_collision_count",
    "load_external_scores",
    "run_benchmark",
]


@dataclass(frozen=True)
class BenchConfig:
    threshold: float = 0.5
    epochs: int = 200
    learning_rate: float = 0.5
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError("threshold must lie in (0, 1]")


@dataclass
class ProbModel:
    labels: list[str]
    weights: np.ndarray  # (n_labels, vocab_size)
    biases: np.ndarray
    vocab: BowVocabulary
    seed: int


@dataclass
class BenchReport:
    in_scope_accuracy: float
    per_intent_accuracy: dict[str, float]
    oos_auc: dict[str, float] = field(default_factory=dict)
    per_collision_count: dict[int, dict] = field(default_factory=dict)
    threshold: float = 0.5


def _design_matrix(corpus: Corpus, vocab: BowVocabulary,
                   label_idx: dict[str, int]):
    rows, cols, vals, ys = [], [], [], []
    r = 0
    for name, intent in corpus.intents.items():
        y = label_idx[name]
        for q in intent.queries:
            for c, v in featurize(q.text, vocab):
                rows.append(r)
                cols.append(c)
                vals.append(float(v))
            ys.append(y)
            r += 1
    X = sparse.csr_matrix((vals, (rows, cols)), shape=(r, vocab.size))
    return X, np.array(ys, dtype=np.int64)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def train_softmax(train: Corpus, cfg: BenchConfig | None = None) -> ProbModel:
    """Multinomial logistic regression by full-batch gradient descent.

    Batch updates keep training deterministic regardless of sample order.
    """
    cfg = cfg or BenchConfig()
    if len(train.intents) < 2:
        raise ValueError("training requires at least 2 intents")
    vocab = build_vocab(train)
    labels = list(train.intents.keys())
    label_idx = {name: i for i, name in enumerate(labels)}
    X, y = _design_matrix(train, vocab, label_idx)
    n, k = X.shape[0], len(labels)

    W = np.zeros((k, vocab.size), dtype=np.float64)
    b = np.zeros(k, dtype=np.float64)
    onehot = np.zeros((n, k), dtype=np.float64)
    onehot[np.arange(n), y] = 1.0
    for _ in range(cfg.epochs):
        P = _softmax(X @ W.T + b)
        G = (P - onehot) / n
        W -= cfg.learning_rate * ((G.T @ X) + cfg.l2 * W)
        b -= cfg.learning_rate * G.sum(axis=0)
    return ProbModel(labels=labels, weights=W, biases=b, vocab=vocab, seed=cfg.seed)


def predict_proba(model: ProbModel, text: str) -> np.ndarray:
    feats = featurize(text, model.vocab)
    logits = model.biases.copy()
    for c, v in feats:
        logits += model.weights[:, c] * v
    return _softmax(logits)


def decide(p: np.ndarray, t: float) -> tuple[str, int | None]:
    """Decision rule: ("in_scope", argmax) when max(p) >= t, else ("out_of_scope", None)."""
    conf = float(np.max(p))
    if conf >= t:
        return "in_scope", int(np.argmax(p))
    return "out_of_scope", None


def in_scope_accuracy(model: ProbModel, test: Corpus) -> tuple[float, dict[str, float]]:
    """Threshold-free argmax accuracy plus per-intent breakdown."""
    if test.num_queries == 0:
        raise ValueError("empty test corpus")
    correct = 0
    total = 0
    per_intent: dict[str, float] = {}
    for name, intent in test.intents.items():
        hits = 0
        for q in intent.queries:
            pred = model.labels[int(np.argmax(predict_proba(model, q.text)))]
            if pred == name:
                hits += 1
        per_intent[name] = hits / len(intent)
        correct += hits
        total += len(intent)
    return correct / total, per_intent


def _confidences(model: ProbModel, texts: list[str]) -> list[float]:
    return [float(np.max(predict_proba(model, t))) for t in texts]


def oos_auc(model: ProbModel, test: Corpus, oos: OOSSet) -> float:
    """AUC separating in-scope from out-of-scope by max softmax confidence."""
    if test.num_queries == 0 or not oos.queries:
        raise ValueError("both test corpus and OOS set must be non-empty")
    pos = _confidences(model, [q.text for q in test.all_queries()])
    neg = _confidences(model, [q.text for q in oos.queries])
    return auc(pos, neg)


def accuracy_by_collision_count(per_intent: dict[str, float], graph: CollisionGraph,
                                naive_names: dict[str, IntentRef]) -> dict[int, dict]:
    """Group intents by their collision-graph degree; unresolvable names count as 0."""
    buckets: dict[int, list[float]] = {}
    for name, acc in per_intent.items():
        ref = naive_names.get(name)
        degree = graph.degree(ref) if ref is not None and ref in graph.nodes else 0
        buckets.setdefault(degree, []).append(acc)
    return {deg: {"mean_accuracy": float(np.mean(vals)), "group_size": len(vals)}
            for deg, vals in sorted(buckets.items())}


def load_external_scores(path: str | Path) -> dict[str, tuple[str, float]]:
    """Read a transformer score file: one ``{"id", "label", "confidence"}`` per line."""
    out: dict[str, tuple[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                out[obj["id"]] = (obj["label"], float(obj["confidence"]))
            except (KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad score record") from exc
    return out


def run_benchmark(train: Corpus, test: Corpus, oos_sets: dict[str, OOSSet],
                  cfg: BenchConfig | None = None,
                  graph: CollisionGraph | None = None,
                  external_scores: dict[str, tuple[str, float]] | None = None
                  ) -> BenchReport:
    """End-to-end benchmark; with external scores no model is trained."""
    cfg = cfg or BenchConfig()
    if external_scores is not None:
        correct = 0
        total = 0
        per_intent = {}
        for name, intent in test.intents.items():
            hits = sum(1 for q in intent.queries
                       if external_scores.get(q.id, ("", 0.0))[0] == name)
            per_intent[name] = hits / len(intent)
            correct += hits
            total += len(intent)
        acc = correct / total
        oos_results = {}
        for source, oos in oos_sets.items():
            pos = [external_scores[q.id][1] for q in test.all_queries()
                   if q.id in external_scores]
            neg = [external_scores[q.id][1] for q in oos.queries
                   if q.id in external_scores]
            if pos and neg:
                oos_results[source] = auc(pos, neg)
    else:
        model = train_softmax(train, cfg)
        acc, per_intent = in_scope_accuracy(model, test)
        oos_results = {source: oos_auc(model, test, oos)
                       for source, oos in oos_sets.items()}

    report = BenchReport(in_scope_accuracy=acc, per_intent_accuracy=per_intent,
                         oos_auc=oos_results, threshold=cfg.threshold)
    if graph is not None:
        naive_names = {}
        for name, intent in test.intents.items():
            first = intent.queries[0]
            if first.source_dataset and first.source_intent:
                naive_names[name] = IntentRef(dataset=first.source_dataset,
                                              intent=first.source_intent)
        report.per_collision_count = accuracy_by_collision_count(
            per_intent, graph, naive_names)
    return report
