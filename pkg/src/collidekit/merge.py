"""Combined-corpus construction: arbitrated (graph-driven) and naive builds.

The arbitrated pipeline is plan -> apply -> min-query filter -> split. Plans
are plain JSON and meant to be hand-edited between planning and applying,
which replaces manual curation with an auditable file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Intent, Query, filter_min_queries, normalize_text
from .coverage import coverage
from .graph import CollisionGraph, CollisionEdge, IntentRef, classify_edge, connected_components
from .similarity import SimilarityKind

__all__ = [
    "MergePlan",
    "MergeGroup",
    "BuildConfig",
    "SplitCorpus",
    "OOSSet",
    "plan_merge",
    "apply_merge",
    "build_arbitrated",
    "build_naive",
    "split",
    "assemble_oos",
    "save_plan",
    "load_plan",
]

MERGED_DATASET_ID = "merged"


@dataclass
class MergeGroup:
    members: list[IntentRef]
    merged_name: str


@dataclass
class MergePlan:
    groups: list[MergeGroup] = field(default_factory=list)
    drops: list[tuple[IntentRef, str]] = field(default_factory=list)
    passthrough: list[IntentRef] = field(default_factory=list)
    renames: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class BuildConfig:
    min_queries: int = 50
    cap: int | None = None
    train_fraction: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.min_queries < 1:
            raise ValueError("min_queries must be >= 1")
        if self.cap is not None and self.cap < self.min_queries:
            raise ValueError("cap must be >= min_queries")


@dataclass
class SplitCorpus:
    train: Corpus
    test: Corpus


@dataclass
class OOSSet:
    queries: list[Query]


def _default_name(ref: IntentRef) -> str:
    return f"{ref.dataset}.{ref.intent}"


def _intent_map(corpora: list[Corpus]) -> dict[IntentRef, Intent]:
    out = {}
    for corpus in corpora:
        for name, intent in corpus.intents.items():
            out[IntentRef(dataset=corpus.dataset_id, intent=name)] = intent
    return out


def plan_merge(graph: CollisionGraph, corpora: list[Corpus],
               drop_hierarchical: bool = False,
               renames: dict[str, str] | None = None,
               rho: float = 2.0) -> MergePlan:
    """Turn graph components into merge groups.

    With ``drop_hierarchical``, the broader endpoint of each hierarchical edge
    (the side whose queries cover the other's) is dropped before grouping.
    Edge kinds stored in the graph are trusted; unlabeled edges are classified
    from n-gram coverage scores.
    """
    renames = renames or {}
    intents = _intent_map(corpora)
    kind = SimilarityKind.for_ngram()

    drops: list[tuple[IntentRef, str]] = []
    dropped: set[IntentRef] = set()
    if drop_hierarchical:
        for (a, b), edge in sorted(graph.edges.items()):
            if a not in intents or b not in intents:
                continue
            cov_ab = coverage(intents[a], intents[b], kind)  # a covering b
            cov_ba = coverage(intents[b], intents[a], kind)
            edge_kind = edge.kind or classify_edge(graph, edge, cov_ab, cov_ba, rho=rho)
            if edge_kind != "hierarchical":
                continue
            broad = a if cov_ab >= cov_ba else b
            if broad not in dropped:
                dropped.add(broad)
                drops.append((broad, f"broad side of hierarchical collision with "
                                     f"{_default_name(b if broad == a else a)}"))

    # rebuild the graph over surviving corpus intents only
    sub = CollisionGraph()
    for ref in intents:
        if ref not in dropped:
            sub.add_node(ref)
    for (a, b) in graph.edges:
        if a in sub.nodes and b in sub.nodes:
            sub.add_edge(a, b)

    groups: list[MergeGroup] = []
    passthrough: list[IntentRef] = []
    taken_names: dict[str, str] = {}
    components = connected_components(sub)
    for comp in components:
        if len(comp) == 1 and sub.degree(comp[0]) == 0:
            passthrough.append(comp[0])
            continue
        default = min(_default_name(ref) for ref in comp)
        name = renames.get(default, default)
        if name in taken_names:
            raise ValueError(f"merged name {name!r} already used by {taken_names[name]!r}")
        taken_names[name] = default
        groups.append(MergeGroup(members=comp, merged_name=name))
    for ref in passthrough:
        name = renames.get(_default_name(ref), _default_name(ref))
        if name in taken_names:
            raise ValueError(f"rename target {name!r} collides with an existing name")
        taken_names[name] = _default_name(ref)
    return MergePlan(groups=groups, drops=drops,
                     passthrough=sorted(passthrough), renames=dict(renames))


def apply_merge(plan: MergePlan, corpora: list[Corpus]) -> Corpus:
    """Materialize a plan into one corpus with provenance on every query."""
    intents = _intent_map(corpora)
    planned: set[IntentRef] = set()
    merged = Corpus(dataset_id=MERGED_DATASET_ID)

    def emit(name: str, members: list[IntentRef]) -> None:
        out = Intent(dataset_id=MERGED_DATASET_ID, name=name)
        ordinal = 0
        for ref in members:
            src = intents.get(ref)
            if src is None:
                raise ValueError(f"plan references missing intent {_default_name(ref)}")
            for q in src.queries:
                out.queries.append(Query(
                    id=f"{MERGED_DATASET_ID}/{name}/{ordinal}",
                    text=q.text, norm_text=q.norm_text,
                    source_dataset=ref.dataset, source_intent=ref.intent))
                ordinal += 1
        merged.intents[name] = out

    for group in plan.groups:
        emit(group.merged_name, sorted(group.members))
        planned.update(group.members)
    planned.update(ref for ref, _ in plan.drops)

    passthrough = plan.passthrough or sorted(set(intents) - planned)
    for ref in sorted(passthrough):
        name = plan.renames.get(_default_name(ref), _default_name(ref))
        emit(name, [ref])
    return merged


def _intent_rng(seed: int, name: str) -> np.random.Generator:
    ss = np.random.SeedSequence([seed] + list(name.encode("utf-8")))
    return np.random.default_rng(ss)


def split(corpus: Corpus, cfg: BuildConfig) -> SplitCorpus:
    """Per-intent seeded split; test size rounds half-up with a floor of 1."""
    train = Corpus(dataset_id=corpus.dataset_id)
    test = Corpus(dataset_id=corpus.dataset_id)
    for name, intent in corpus.intents.items():
        n = len(intent)
        if n < 2:
            raise ValueError(f"intent {name!r} has {n} query; cannot split")
        n_test = max(1, math.floor((1.0 - cfg.train_fraction) * n + 0.5))
        perm = _intent_rng(cfg.seed, name).permutation(n)
        test_idx = set(int(i) for i in perm[:n_test])
        tr = Intent(dataset_id=corpus.dataset_id, name=name)
        te = Intent(dataset_id=corpus.dataset_id, name=name)
        for i, q in enumerate(intent.queries):
            side, bucket = (("test", te) if i in test_idx else ("train", tr))
            bucket.queries.append(Query(
                id=q.id, text=q.text, norm_text=q.norm_text, split=side,
                source_dataset=q.source_dataset, source_intent=q.source_intent))
        train.intents[name] = tr
        test.intents[name] = te
    return SplitCorpus(train=train, test=test)


def _cap_intent(intent: Intent, cap: int, seed: int) -> Intent:
    if len(intent) <= cap:
        return intent
    keep = _intent_rng(seed, intent.name).permutation(len(intent))[:cap]
    capped = Intent(dataset_id=intent.dataset_id, name=intent.name)
    for i in sorted(int(k) for k in keep):
        capped.queries.append(intent.queries[i])
    return capped


def build_arbitrated(corpora: list[Corpus], graph: CollisionGraph,
                     cfg: BuildConfig | None = None,
                     drop_hierarchical: bool = True,
                     plan: MergePlan | None = None) -> SplitCorpus:
    cfg = cfg or BuildConfig()
    if plan is None:
        plan = plan_merge(graph, corpora, drop_hierarchical=drop_hierarchical)
    merged = apply_merge(plan, corpora)
    filtered = filter_min_queries([merged], cfg.min_queries)
    if not filtered:
        raise ValueError("no intents survive the min-query filter")
    merged = filtered[0]
    if cfg.cap is not None:
        for name in list(merged.intents):
            merged.intents[name] = _cap_intent(merged.intents[name], cfg.cap, cfg.seed)
    return split(merged, cfg)


def build_naive(corpora: list[Corpus], cfg: BuildConfig | None = None) -> SplitCorpus:
    """Concatenate everything under dataset-qualified names; no arbitration."""
    cfg = cfg or BuildConfig(cap=150)
    empty = CollisionGraph()
    plan = plan_merge(empty, corpora)
    merged = apply_merge(plan, corpora)
    filtered = filter_min_queries([merged], cfg.min_queries)
    if not filtered:
        raise ValueError("no intents survive the min-query filter")
    merged = filtered[0]
    if cfg.cap is not None:
        for name in list(merged.intents):
            merged.intents[name] = _cap_intent(merged.intents[name], cfg.cap, cfg.seed)
    return split(merged, cfg)


def assemble_oos(sources: list[list[Query]], inscope: Corpus) -> OOSSet:
    """Concatenate, dedupe on normalized text, drop anything in-scope verbatim."""
    inscope_texts = {q.norm_text for q in inscope.all_queries()}
    seen: set[str] = set()
    out: list[Query] = []
    for queries in sources:
        for q in queries:
            key = q.norm_text if q.norm_text else normalize_text(q.text)
            if not key or key in seen or key in inscope_texts:
                continue
            seen.add(key)
            out.append(q)
    return OOSSet(queries=out)


def _ref_obj(ref: IntentRef) -> dict:
    return {"dataset": ref.dataset, "intent": ref.intent}


def save_plan(plan: MergePlan, path: str | Path) -> None:
    doc = {
        "groups": [{"members": [_ref_obj(r) for r in g.members],
                    "merged_name": g.merged_name} for g in plan.groups],
        "drops": [{"ref": _ref_obj(ref), "reason": reason}
                  for ref, reason in plan.drops],
        "renames": plan.renames,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path: str | Path) -> MergePlan:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    groups = [MergeGroup(
        members=[IntentRef(dataset=m["dataset"], intent=m["intent"])
                 for m in g["members"]],
        merged_name=g["merged_name"]) for g in doc.get("groups", [])]
    drops = [(IntentRef(dataset=d["ref"]["dataset"], intent=d["ref"]["intent"]),
              d.get("reason", "")) for d in doc.get("drops", [])]
    return MergePlan(groups=groups, drops=drops, passthrough=[],
                     renames=doc.get("renames", {}))
