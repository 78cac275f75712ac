"""Document-oriented knowledge-graph store with k-hop subgraph extraction.

Nodes and edges are JSON documents ({_id, name, description, type}, edges
adding {in_id, out_id, weight}). Each graph persists as two append-only
JSONL files; the newest document per id wins at load time. Readers work
against an immutable snapshot that writers swap atomically, so queries
never observe a half-applied batch.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import Conflict, DanglingEdge, InvalidDocument, InvalidParam, NotFound
from .tokenizer import split_words

KG_NAME_RE = re.compile(r"^[a-z0-9_-]+$")
DEFAULT_HOP_CAP = 3
MAX_LINK_NGRAM = 3

NODE_FIELDS = ("_id", "name", "description", "type")
EDGE_FIELDS = NODE_FIELDS + ("in_id", "out_id", "weight")


@dataclass(frozen=True)
class KGNode:
    id: str
    name: str
    description: str = ""
    type: str = ""

    def doc(self) -> dict:
        return {"_id": self.id, "name": self.name,
                "description": self.description, "type": self.type}


@dataclass(frozen=True)
class KGEdge:
    id: str
    name: str
    description: str
    type: str
    in_id: str
    out_id: str
    weight: float

    def doc(self) -> dict:
        return {"_id": self.id, "name": self.name,
                "description": self.description, "type": self.type,
                "in_id": self.in_id, "out_id": self.out_id,
                "weight": self.weight}


@dataclass(frozen=True)
class LinkedEntity:
    span: tuple[int, int]  # inclusive word indices into the linked text
    text: str
    node_id: str


@dataclass(frozen=True)
class Subgraph:
    kg: str
    roots: tuple[str, ...]
    nodes: tuple[KGNode, ...]  # sorted by id
    edges: tuple[KGEdge, ...]  # sorted by id
    hop_distance: dict[str, int] = field(compare=False)

    @property
    def node_ids(self) -> set[str]:
        return {n.id for n in self.nodes}


def _require_str(doc: dict, key: str, where: str, allow_empty: bool = False) -> str:
    value = doc.get(key)
    if not isinstance(value, str) or (not allow_empty and not value):
        raise InvalidDocument(f"{where}: field {key!r} must be a non-empty string")
    return value


def node_from_doc(doc: dict) -> KGNode:
    if not isinstance(doc, dict):
        raise InvalidDocument("node document must be an object")
    extra = set(doc) - set(NODE_FIELDS)
    if extra:
        raise InvalidDocument(f"node document has unknown fields {sorted(extra)}")
    return KGNode(
        id=_require_str(doc, "_id", "node"),
        name=_require_str(doc, "name", "node"),
        description=_require_str(doc, "description", "node", allow_empty=True)
        if "description" in doc else "",
        type=_require_str(doc, "type", "node", allow_empty=True)
        if "type" in doc else "",
    )


def edge_from_doc(doc: dict) -> KGEdge:
    if not isinstance(doc, dict):
        raise InvalidDocument("edge document must be an object")
    extra = set(doc) - set(EDGE_FIELDS)
    if extra:
        raise InvalidDocument(f"edge document has unknown fields {sorted(extra)}")
    weight = doc.get("weight")
    if isinstance(weight, bool) or not isinstance(weight, (int, float)) \
            or weight != weight or weight in (float("inf"), float("-inf")):
        raise InvalidDocument("edge: field 'weight' must be a finite number")
    return KGEdge(
        id=_require_str(doc, "_id", "edge"),
        name=_require_str(doc, "name", "edge"),
        description=_require_str(doc, "description", "edge", allow_empty=True)
        if "description" in doc else "",
        type=_require_str(doc, "type", "edge", allow_empty=True)
        if "type" in doc else "",
        in_id=_require_str(doc, "in_id", "edge"),
        out_id=_require_str(doc, "out_id", "edge"),
        weight=float(weight),
    )


@dataclass(frozen=True)
class _Snapshot:
    nodes: dict
    edges: dict
    by_name: dict      # casefolded name -> tuple of node ids, sorted
    adjacency: dict    # node id -> tuple of (neighbor id, edge id), undirected


def _build_snapshot(nodes: dict, edges: dict) -> _Snapshot:
    by_name: dict[str, list[str]] = {}
    for node in nodes.values():
        by_name.setdefault(node.name.casefold(), []).append(node.id)
    adjacency: dict[str, list[tuple[str, str]]] = {}
    for edge in edges.values():
        adjacency.setdefault(edge.in_id, []).append((edge.out_id, edge.id))
        adjacency.setdefault(edge.out_id, []).append((edge.in_id, edge.id))
    return _Snapshot(
        nodes=dict(nodes),
        edges=dict(edges),
        by_name={k: tuple(sorted(v)) for k, v in by_name.items()},
        adjacency={k: tuple(sorted(v)) for k, v in adjacency.items()},
    )


class KnowledgeGraph:
    """One named graph: in-memory snapshot plus a JSONL append log."""

    def __init__(self, name: str, directory: str, hop_cap: int = DEFAULT_HOP_CAP):
        self.name = name
        self.hop_cap = hop_cap
        self._dir = directory
        self._lock = threading.Lock()
        nodes: dict[str, KGNode] = {}
        edges: dict[str, KGEdge] = {}
        for doc in self._read_log(self._nodes_path()):
            node = node_from_doc(doc)
            nodes[node.id] = node
        for doc in self._read_log(self._edges_path()):
            edge = edge_from_doc(doc)
            edges[edge.id] = edge
        self._snapshot = _build_snapshot(nodes, edges)

    def _nodes_path(self) -> str:
        return os.path.join(self._dir, f"{self.name}.nodes.jsonl")

    def _edges_path(self) -> str:
        return os.path.join(self._dir, f"{self.name}.edges.jsonl")

    @staticmethod
    def _read_log(path: str) -> Iterable[dict]:
        if not os.path.exists(path):
            return []
        out = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    @staticmethod
    def _append_log(path: str, docs: Sequence[dict]) -> None:
        with open(path, "a") as fh:
            for doc in docs:
                fh.write(json.dumps(doc) + "\n")

    # -- ingestion ----------------------------------------------------------

    def upsert_nodes(self, docs: Sequence[dict]) -> int:
        parsed = [node_from_doc(d) for d in docs]
        with self._lock:
            nodes = dict(self._snapshot.nodes)
            for node in parsed:
                nodes[node.id] = node
            snapshot = _build_snapshot(nodes, self._snapshot.edges)
            self._append_log(self._nodes_path(), [n.doc() for n in parsed])
            self._snapshot = snapshot
        return len(parsed)

    def upsert_edges(self, docs: Sequence[dict], mode: str = "strict") -> int:
        """strict: fail on the first edge with a missing endpoint.
        bulk: insert everything, then validate once; any dangling endpoint
        rejects the whole batch. Neither mode commits a bad batch."""
        if mode not in ("strict", "bulk"):
            raise InvalidParam(f"unknown edge upsert mode {mode!r}")
        parsed = [edge_from_doc(d) for d in docs]
        with self._lock:
            nodes = self._snapshot.nodes
            if mode == "strict":
                for edge in parsed:
                    for endpoint in (edge.in_id, edge.out_id):
                        if endpoint not in nodes:
                            raise DanglingEdge(
                                f"edge {edge.id!r} references missing node {endpoint!r}")
            else:
                missing = sorted({
                    endpoint
                    for edge in parsed
                    for endpoint in (edge.in_id, edge.out_id)
                    if endpoint not in nodes})
                if missing:
                    raise DanglingEdge(
                        f"bulk batch references missing nodes: {missing}")
            edges = dict(self._snapshot.edges)
            for edge in parsed:
                edges[edge.id] = edge
            snapshot = _build_snapshot(nodes, edges)
            self._append_log(self._edges_path(), [e.doc() for e in parsed])
            self._snapshot = snapshot
        return len(parsed)

    # -- lookups ------------------------------------------------------------

    def get_node(self, node_id: str) -> KGNode:
        node = self._snapshot.nodes.get(node_id)
        if node is None:
            raise NotFound(f"no node with id {node_id!r}")
        return node

    def find_nodes_by_name(self, name: str) -> list[KGNode]:
        snap = self._snapshot
        return [snap.nodes[i] for i in snap.by_name.get(name.casefold(), ())]

    def node_count(self) -> int:
        return len(self._snapshot.nodes)

    def edge_count(self) -> int:
        return len(self._snapshot.edges)

    # -- extraction ---------------------------------------------------------

    def extract_subgraph(self, roots: Sequence[str], k: int) -> Subgraph:
        snap = self._snapshot
        roots = list(dict.fromkeys(roots))
        if not roots:
            raise InvalidParam("roots must be non-empty")
        for root in roots:
            if root not in snap.nodes:
                raise NotFound(f"unknown root node {root!r}")
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= self.hop_cap:
            raise InvalidParam(f"hops must be an integer between 1 and {self.hop_cap}")
        dist = {root: 0 for root in roots}
        frontier = list(roots)
        for depth in range(1, k + 1):
            nxt = []
            for u in frontier:
                for v, _edge_id in snap.adjacency.get(u, ()):
                    if v not in dist:
                        dist[v] = depth
                        nxt.append(v)
            frontier = nxt
        nodes = tuple(snap.nodes[i] for i in sorted(dist))
        edges = tuple(sorted(
            (e for e in snap.edges.values()
             if e.in_id in dist and e.out_id in dist),
            key=lambda e: e.id))
        sg = Subgraph(kg=self.name, roots=tuple(roots), nodes=nodes,
                      edges=edges, hop_distance=dist)
        return prune_disconnected(sg)

    # -- entity linking -----------------------------------------------------

    def link_entities(self, text: str) -> list[LinkedEntity]:
        """Greedy longest-match of node names over word n-grams (n <= 3),
        left to right, non-overlapping, case-insensitive."""
        snap = self._snapshot
        words = split_words(text)
        links: list[LinkedEntity] = []
        i = 0
        while i < len(words):
            hit = None
            for n in range(min(MAX_LINK_NGRAM, len(words) - i), 0, -1):
                phrase = " ".join(words[i:i + n])
                ids = snap.by_name.get(phrase)
                if ids:
                    hit = (n, phrase, ids[0])
                    break
            if hit:
                n, phrase, node_id = hit
                links.append(LinkedEntity(span=(i, i + n - 1), text=phrase,
                                          node_id=node_id))
                i += n
            else:
                i += 1
        return links


def prune_disconnected(sg: Subgraph) -> Subgraph:
    """Drop nodes with no undirected path to any root, and their edges."""
    adjacency: dict[str, set[str]] = {}
    for e in sg.edges:
        adjacency.setdefault(e.in_id, set()).add(e.out_id)
        adjacency.setdefault(e.out_id, set()).add(e.in_id)
    present = sg.node_ids
    reached = set(r for r in sg.roots if r in present)
    frontier = list(reached)
    while frontier:
        nxt = []
        for u in frontier:
            for v in adjacency.get(u, ()):
                if v in present and v not in reached:
                    reached.add(v)
                    nxt.append(v)
        frontier = nxt
    nodes = tuple(n for n in sg.nodes if n.id in reached)
    edges = tuple(e for e in sg.edges
                  if e.in_id in reached and e.out_id in reached)
    dist = {i: d for i, d in sg.hop_distance.items() if i in reached}
    return Subgraph(kg=sg.kg, roots=sg.roots, nodes=nodes, edges=edges,
                    hop_distance=dist)


class KGStore:
    """Registry of named graphs under one data directory."""

    def __init__(self, data_dir: str, hop_cap: int = DEFAULT_HOP_CAP):
        self.data_dir = data_dir
        self.hop_cap = hop_cap
        os.makedirs(data_dir, exist_ok=True)
        self._lock = threading.Lock()
        self._graphs: dict[str, KnowledgeGraph] = {}

    def _marker(self, name: str) -> str:
        return os.path.join(self.data_dir, f"{name}.nodes.jsonl")

    def create(self, name: str) -> KnowledgeGraph:
        if not isinstance(name, str) or not KG_NAME_RE.match(name):
            raise InvalidParam(
                f"KG name must match {KG_NAME_RE.pattern}, got {name!r}")
        with self._lock:
            if os.path.exists(self._marker(name)):
                raise Conflict(f"KG {name!r} already exists")
            open(self._marker(name), "a").close()
            open(os.path.join(self.data_dir, f"{name}.edges.jsonl"), "a").close()
            kg = KnowledgeGraph(name, self.data_dir, hop_cap=self.hop_cap)
            self._graphs[name] = kg
            return kg

    def get(self, name: str) -> KnowledgeGraph:
        with self._lock:
            if name in self._graphs:
                return self._graphs[name]
            if isinstance(name, str) and KG_NAME_RE.match(name) \
                    and os.path.exists(self._marker(name)):
                kg = KnowledgeGraph(name, self.data_dir, hop_cap=self.hop_cap)
                self._graphs[name] = kg
                return kg
        raise NotFound(f"no KG named {name!r}")

    def list_names(self) -> list[str]:
        suffix = ".nodes.jsonl"
        return sorted(
            fn[:-len(suffix)] for fn in os.listdir(self.data_dir)
            if fn.endswith(suffix))


# A hand-checkable miniature graph: a crab lives in the sea, the sea goes
# with saltwater, and a crab is a crustacean.
CRAB_FIXTURE_NODES = (
    {"_id": "crab", "name": "crab",
     "description": "a crustacean with a broad carapace", "type": "concept"},
    {"_id": "sea", "name": "sea",
     "description": "a large body of salty water", "type": "concept"},
    {"_id": "saltwater", "name": "saltwater",
     "description": "water that contains dissolved salt", "type": "concept"},
    {"_id": "crustacean", "name": "crustacean",
     "description": "an arthropod with a hard shell", "type": "concept"},
)

CRAB_FIXTURE_EDGES = (
    {"_id": "crab-atlocation-sea", "name": "AtLocation",
     "description": "", "type": "relation",
     "in_id": "crab", "out_id": "sea", "weight": 2.0},
    {"_id": "sea-relatedto-saltwater", "name": "RelatedTo",
     "description": "", "type": "relation",
     "in_id": "sea", "out_id": "saltwater", "weight": 1.5},
    {"_id": "crab-isa-crustacean", "name": "IsA",
     "description": "", "type": "relation",
     "in_id": "crab", "out_id": "crustacean", "weight": 1.0},
)


def load_crab_fixture(kg: KnowledgeGraph) -> None:
    kg.upsert_nodes(list(CRAB_FIXTURE_NODES))
    kg.upsert_edges(list(CRAB_FIXTURE_EDGES), mode="bulk")
