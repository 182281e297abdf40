"""Canonical in-memory and on-disk representation of intent classification corpora.

The interchange format is JSONL with one object per line:
``{"dataset": ..., "intent": ..., "text": ..., "split": optional}``.
CSV input (columns ``text,intent``) is supported for ingestion; everything
downstream works on the canonical form.
"""

from __future__ import annotations

import csv
import io
import json
import string
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "Query",
    "Intent",
    "Corpus",
    "CorpusError",
    "normalize_text",
    "load_corpus",
    "save_corpus_jsonl",
    "filter_min_queries",
]


class CorpusError(ValueError):
    """Raised on malformed corpus input."""


_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def normalize_text(text: str) -> str:
    """Lowercase, map ASCII punctuation to spaces, collapse whitespace runs."""
    lowered = text.lower().translate(_PUNCT_TABLE)
    return " ".join(lowered.split())


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    norm_text: str
    split: str | None = None
    source_dataset: str | None = None
    source_intent: str | None = None


@dataclass
class Intent:
    dataset_id: str
    name: str
    queries: list[Query] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.queries)


@dataclass
class Corpus:
    dataset_id: str
    intents: dict[str, Intent] = field(default_factory=dict)

    @property
    def num_queries(self) -> int:
        return sum(len(it) for it in self.intents.values())

    def all_queries(self):
        for intent in self.intents.values():
            yield from intent.queries


def _add_record(corpus: Corpus, intent_name: str, text: str, split: str | None,
                counters: dict[str, int],
                source_dataset: str | None = None,
                source_intent: str | None = None) -> None:
    ordinal = counters.get(intent_name, 0)
    counters[intent_name] = ordinal + 1
    qid = f"{corpus.dataset_id}/{intent_name}/{ordinal}"
    query = Query(
        id=qid,
        text=text,
        norm_text=normalize_text(text),
        split=split,
        source_dataset=source_dataset,
        source_intent=source_intent,
    )
    intent = corpus.intents.get(intent_name)
    if intent is None:
        intent = Intent(dataset_id=corpus.dataset_id, name=intent_name)
        corpus.intents[intent_name] = intent
    intent.queries.append(query)


def load_corpus(path: str | Path, format: str = "jsonl",
                dataset_id: str | None = None) -> Corpus:
    """Load one dataset from a JSONL or CSV file.

    JSONL rows carry their own ``dataset`` key (all rows must agree);
    CSV needs ``dataset_id`` passed explicitly. Query ids are assigned
    positionally as ``<dataset>/<intent>/<0-based ordinal>``.
    """
    path = Path(path)
    if format == "jsonl":
        return _load_jsonl(path, dataset_id)
    if format == "csv":
        if dataset_id is None:
            raise CorpusError("csv format requires an explicit dataset_id")
        return _load_csv(path, dataset_id)
    raise CorpusError(f"unknown corpus format {format!r}")


def _load_jsonl(path: Path, dataset_id: str | None) -> Corpus:
    corpus: Corpus | None = None
    counters: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                ds = obj["dataset"]
                intent = obj["intent"]
                text = obj["text"]
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: missing required key {exc}") from exc
            if not isinstance(text, str) or not text.strip():
                raise CorpusError(f"{path}:{lineno}: empty text field")
            split = obj.get("split")
            if split is not None and split not in ("train", "test"):
                raise CorpusError(f"{path}:{lineno}: bad split {split!r}")
            if corpus is None:
                if dataset_id is not None and ds != dataset_id:
                    raise CorpusError(f"{path}:{lineno}: dataset {ds!r} != expected {dataset_id!r}")
                corpus = Corpus(dataset_id=ds)
            elif ds != corpus.dataset_id:
                raise CorpusError(
                    f"{path}:{lineno}: dataset {ds!r} conflicts with {corpus.dataset_id!r}")
            _add_record(corpus, intent, text, split, counters,
                        source_dataset=obj.get("source_dataset"),
                        source_intent=obj.get("source_intent"))
    if corpus is None:
        raise CorpusError(f"{path}: no records")
    return corpus


def _load_csv(path: Path, dataset_id: str) -> Corpus:
    corpus = Corpus(dataset_id=dataset_id)
    counters: dict[str, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "text" not in reader.fieldnames \
                or "intent" not in reader.fieldnames:
            raise CorpusError(f"{path}: csv must have text,intent columns")
        for lineno, row in enumerate(reader, start=2):
            text = (row.get("text") or "").strip()
            intent = (row.get("intent") or "").strip()
            if not text:
                raise CorpusError(f"{path}:{lineno}: empty text field")
            if not intent:
                raise CorpusError(f"{path}:{lineno}: empty intent field")
            _add_record(corpus, intent, row["text"], None, counters)
    if not corpus.intents:
        raise CorpusError(f"{path}: no records")
    return corpus


def save_corpus_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write canonical JSONL: intents in insertion order, stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for intent in corpus.intents.values():
            for q in intent.queries:
                obj: dict = {"dataset": corpus.dataset_id, "intent": intent.name,
                             "text": q.text}
                if q.split is not None:
                    obj["split"] = q.split
                if q.source_dataset is not None:
                    obj["source_dataset"] = q.source_dataset
                if q.source_intent is not None:
                    obj["source_intent"] = q.source_intent
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def corpus_to_jsonl_bytes(corpus: Corpus) -> bytes:
    buf = io.StringIO()
    for intent in corpus.intents.values():
        for q in intent.queries:
            obj: dict = {"dataset": corpus.dataset_id, "intent": intent.name, "text": q.text}
            if q.split is not None:
                obj["split"] = q.split
            if q.source_dataset is not None:
                obj["source_dataset"] = q.source_dataset
            if q.source_intent is not None:
                obj["source_intent"] = q.source_intent
            buf.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return buf.getvalue().encode("utf-8")


def load_collection(path: str | Path) -> list[Corpus]:
    """Load a JSONL file that may interleave several datasets.

    Rows are grouped by their ``dataset`` key; corpora come back in first-seen
    order with positional query ids per dataset.
    """
    path = Path(path)
    corpora: dict[str, Corpus] = {}
    counters: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                ds = obj["dataset"]
                intent = obj["intent"]
                text = obj["text"]
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: missing required key {exc}") from exc
            if not isinstance(text, str) or not text.strip():
                raise CorpusError(f"{path}:{lineno}: empty text field")
            corpus = corpora.get(ds)
            if corpus is None:
                corpus = Corpus(dataset_id=ds)
                corpora[ds] = corpus
                counters[ds] = {}
            _add_record(corpus, intent, text, obj.get("split"), counters[ds],
                        source_dataset=obj.get("source_dataset"),
                        source_intent=obj.get("source_intent"))
    if not corpora:
        raise CorpusError(f"{path}: no records")
    return list(corpora.values())


def filter_min_queries(collection: list[Corpus], min_n: int) -> list[Corpus]:
    """Drop intents with fewer than ``min_n`` queries; drop corpora left empty."""
    if min_n < 1:
        raise ValueError("min_n must be >= 1")
    out: list[Corpus] = []
    for corpus in collection:
        kept = {name: it for name, it in corpus.intents.items() if len(it) >= min_n}
        if kept:
            out.append(Corpus(dataset_id=corpus.dataset_id, intents=kept))
    return out


def relabel_query(q: Query, new_id: str, split: str | None = None) -> Query:
    return replace(q, id=new_id, split=split if split is not None else q.split)
