"""Collision meta-dataset: an undirected graph over (dataset, intent) nodes.

On-disk form is a JSON array of ``{"dataset", "intent", "collisions": [...]}``
objects; loading applies symmetric closure so one-sided annotations still
produce the single undirected edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "IntentRef",
    "CollisionEdge",
    "CollisionGraph",
    "GraphError",
    "load_meta",
    "save_meta",
    "connected_components",
    "classify_edge",
    "validate_against_corpora",
]

EDGE_KINDS = ("simple_pairwise", "transitive", "hierarchical")


class GraphError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class IntentRef:
    dataset: str
    intent: str

    def __post_init__(self):
        if not self.dataset or not self.intent:
            raise GraphError("IntentRef fields must be non-empty")


@dataclass(frozen=True)
class CollisionEdge:
    a: IntentRef
    b: IntentRef
    kind: str | None = None

    def __post_init__(self):
        if self.a == self.b:
            raise GraphError(f"self-loop on {self.a}")
        if self.a > self.b:
            # normalize to undirected storage order
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)
        if self.kind is not None and self.kind not in EDGE_KINDS:
            raise GraphError(f"unknown edge kind {self.kind!r}")

    def key(self) -> tuple[IntentRef, IntentRef]:
        return (self.a, self.b)


class CollisionGraph:
    def __init__(self):
        self.nodes: set[IntentRef] = set()
        self.edges: dict[tuple[IntentRef, IntentRef], CollisionEdge] = {}

    def add_node(self, ref: IntentRef) -> None:
        self.nodes.add(ref)

    def add_edge(self, a: IntentRef, b: IntentRef, kind: str | None = None) -> None:
        edge = CollisionEdge(a=a, b=b, kind=kind)
        self.nodes.add(edge.a)
        self.nodes.add(edge.b)
        existing = self.edges.get(edge.key())
        if existing is None or (existing.kind is None and kind is not None):
            self.edges[edge.key()] = edge

    def degree(self, ref: IntentRef) -> int:
        return sum(1 for a, b in self.edges if a == ref or b == ref)

    def neighbors(self, ref: IntentRef) -> list[IntentRef]:
        out = []
        for a, b in self.edges:
            if a == ref:
                out.append(b)
            elif b == ref:
                out.append(a)
        return sorted(out)

    def has_edge(self, a: IntentRef, b: IntentRef) -> bool:
        lo, hi = (a, b) if a <= b else (b, a)
        return (lo, hi) in self.edges

    def __eq__(self, other) -> bool:
        return (isinstance(other, CollisionGraph)
                and self.nodes == other.nodes
                and set(self.edges) == set(other.edges))


def _parse_ref(obj: dict, context: str) -> IntentRef:
    try:
        return IntentRef(dataset=obj["dataset"], intent=obj["intent"])
    except (KeyError, TypeError) as exc:
        raise GraphError(f"{context}: malformed intent ref {obj!r}") from exc


def load_meta(path: str | Path) -> CollisionGraph:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise GraphError(f"{path}: expected a JSON array")
    graph = CollisionGraph()
    for i, entry in enumerate(doc):
        node = _parse_ref(entry, f"{path}[{i}]")
        graph.add_node(node)
        for j, other in enumerate(entry.get("collisions", [])):
            ref = _parse_ref(other, f"{path}[{i}].collisions[{j}]")
            if ref == node:
                raise GraphError(f"{path}[{i}]: {node} lists itself as a collision")
            kind = other.get("kind")
            graph.add_edge(node, ref, kind=kind)
    return graph


def save_meta(graph: CollisionGraph, path: str | Path) -> None:
    """Canonical serialization: nodes sorted, every node lists all its neighbors."""
    entries = []
    for node in sorted(graph.nodes):
        collisions = []
        for nb in graph.neighbors(node):
            lo, hi = (node, nb) if node <= nb else (nb, node)
            edge = graph.edges[(lo, hi)]
            item = {"dataset": nb.dataset, "intent": nb.intent}
            if edge.kind is not None:
                item["kind"] = edge.kind
            collisions.append(item)
        entries.append({"dataset": node.dataset, "intent": node.intent,
                        "collisions": collisions})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(entries, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def connected_components(graph: CollisionGraph) -> list[list[IntentRef]]:
    """Partition of all nodes by undirected reachability, singletons included.

    Groups are sorted internally and ordered by their smallest member.
    """
    uf = _UnionFind()
    for node in graph.nodes:
        uf.add(node)
    for a, b in graph.edges:
        uf.union(a, b)
    groups: dict[IntentRef, list[IntentRef]] = {}
    for node in graph.nodes:
        groups.setdefault(uf.find(node), []).append(node)
    out = [sorted(members) for members in groups.values()]
    return sorted(out, key=lambda g: g[0])


def classify_edge(graph: CollisionGraph, edge: CollisionEdge,
                  cov_ab: float, cov_ba: float, rho: float = 2.0,
                  eps: float = 1e-9) -> str:
    """Heuristic edge-kind assignment from the two directed coverage scores.

    A strongly asymmetric pair (ratio above ``rho``) is hierarchical: the
    direction with the higher score identifies the broader intent. Otherwise
    an isolated pair is simple_pairwise and anything chained is transitive.
    """
    if rho <= 1.0:
        raise GraphError("rho must be > 1")
    hi = max(cov_ab, cov_ba)
    lo = max(eps, min(cov_ab, cov_ba))
    if hi / lo > rho:
        return "hierarchical"
    if graph.degree(edge.a) == 1 and graph.degree(edge.b) == 1:
        return "simple_pairwise"
    return "transitive"


def validate_against_corpora(graph: CollisionGraph, corpora: list) -> dict:
    """Cross-check graph nodes against loaded corpora.

    Graph nodes with no backing corpus intent are unresolved (a problem);
    corpus intents absent from the graph simply have no known collisions.
    """
    available = {IntentRef(dataset=c.dataset_id, intent=name)
                 for c in corpora for name in c.intents}
    unresolved = sorted(graph.nodes - available)
    no_collision = sorted(available - graph.nodes)
    return {
        "unresolved": [{"dataset": r.dataset, "intent": r.intent} for r in unresolved],
        "no_collision_intents": [{"dataset": r.dataset, "intent": r.intent}
                                 for r in no_collision],
    }
