"""Store semantics, the BFS oracle, pruning, and entity linking."""

import json
import random

import pytest

from qaprobe.errors import Conflict, DanglingEdge, InvalidDocument, InvalidParam, NotFound
from qaprobe.kg import (
    CRAB_FIXTURE_EDGES,
    CRAB_FIXTURE_NODES,
    KGEdge,
    KGNode,
    KGStore,
    Subgraph,
    load_crab_fixture,
    prune_disconnected,
)


@pytest.fixture()
def store(tmp_path):
    return KGStore(str(tmp_path))


@pytest.fixture()
def fixture_kg(store):
    kg = store.create("conceptnet-mini")
    load_crab_fixture(kg)
    return kg


def node_doc(i):
    return {"_id": f"n{i}", "name": f"node {i}", "description": "", "type": "t"}


def edge_doc(eid, a, b, w=1.0):
    return {"_id": eid, "name": "rel", "description": "", "type": "t",
            "in_id": a, "out_id": b, "weight": w}


# --- store basics ----------------------------------------------------------

def test_create_list_and_conflict(store):
    assert store.list_names() == []
    store.create("alpha")
    store.create("beta")
    assert store.list_names() == ["alpha", "beta"]
    with pytest.raises(Conflict):
        store.create("alpha")
    with pytest.raises(InvalidParam):
        store.create("Bad Name!")
    with pytest.raises(NotFound):
        store.get("gamma")


def test_upsert_is_last_wins(store):
    kg = store.create("g")
    kg.upsert_nodes([node_doc(1)])
    kg.upsert_nodes([{**node_doc(1), "description": "newer"}])
    assert kg.node_count() == 1
    assert kg.get_node("n1").description == "newer"


def test_schema_validation(store):
    kg = store.create("g")
    with pytest.raises(InvalidDocument):
        kg.upsert_nodes([{"_id": "", "name": "x"}])
    with pytest.raises(InvalidDocument):
        kg.upsert_nodes([{"_id": "a", "name": "x", "extra": 1}])
    kg.upsert_nodes([node_doc(1), node_doc(2)])
    with pytest.raises(InvalidDocument):
        kg.upsert_edges([edge_doc("e", "n1", "n2", w=float("nan"))])
    with pytest.raises(InvalidDocument):
        kg.upsert_edges([{**edge_doc("e", "n1", "n2"), "weight": "heavy"}])


def test_strict_mode_rejects_dangling_edges(store):
    kg = store.create("g")
    kg.upsert_nodes([node_doc(1)])
    with pytest.raises(DanglingEdge):
        kg.upsert_edges([edge_doc("e1", "n1", "n9")])
    assert kg.edge_count() == 0


def test_bulk_mode_is_all_or_nothing(store):
    kg = store.create("g")
    kg.upsert_nodes([node_doc(1), node_doc(2)])
    with pytest.raises(DanglingEdge) as err:
        kg.upsert_edges([edge_doc("e1", "n1", "n2"),
                         edge_doc("e2", "n2", "n7"),
                         edge_doc("e3", "n8", "n1")], mode="bulk")
    assert "n7" in str(err.value) and "n8" in str(err.value)
    assert kg.edge_count() == 0
    assert kg.upsert_edges([edge_doc("e1", "n1", "n2")], mode="bulk") == 1


def test_fixture_round_trip(fixture_kg):
    assert fixture_kg.node_count() == 4
    assert fixture_kg.edge_count() == 3
    crab = fixture_kg.get_node("crab")
    assert crab.doc() == dict(CRAB_FIXTURE_NODES[0])
    assert [n.id for n in fixture_kg.find_nodes_by_name("Sea")] == ["sea"]
    assert fixture_kg.find_nodes_by_name("desert") == []
    with pytest.raises(NotFound):
        fixture_kg.get_node("desert")


def test_persistence_reload_preserves_queries(tmp_path):
    store = KGStore(str(tmp_path))
    kg = store.create("g")
    load_crab_fixture(kg)
    kg.upsert_nodes([{**dict(CRAB_FIXTURE_NODES[1]), "description": "edited"}])

    reloaded = KGStore(str(tmp_path)).get("g")
    assert reloaded.get_node("sea").description == "edited"
    a = kg.extract_subgraph(["crab"], 2)
    b = reloaded.extract_subgraph(["crab"], 2)
    assert [n.doc() for n in a.nodes] == [n.doc() for n in b.nodes]
    assert [e.doc() for e in a.edges] == [e.doc() for e in b.edges]
    assert a.hop_distance == b.hop_distance


# --- subgraph extraction ---------------------------------------------------

def test_fixture_subgraph_by_hand(fixture_kg):
    sg = fixture_kg.extract_subgraph(["crab"], 2)
    assert sorted(sg.node_ids) == ["crab", "crustacean", "saltwater", "sea"]
    assert sg.hop_distance == {"crab": 0, "sea": 1, "crustacean": 1,
                               "saltwater": 2}
    one = fixture_kg.extract_subgraph(["crab"], 1)
    assert sorted(one.node_ids) == ["crab", "crustacean", "sea"]
    assert [e.id for e in one.edges] == ["crab-atlocation-sea",
                                         "crab-isa-crustacean"]


def test_extraction_guards(fixture_kg):
    with pytest.raises(NotFound):
        fixture_kg.extract_subgraph(["kraken"], 2)
    with pytest.raises(InvalidParam):
        fixture_kg.extract_subgraph(["crab"], 4)  # above the hop cap
    with pytest.raises(InvalidParam):
        fixture_kg.extract_subgraph(["crab"], 0)
    with pytest.raises(InvalidParam):
        fixture_kg.extract_subgraph([], 1)
    assert "3" in str(pytest.raises(
        InvalidParam, fixture_kg.extract_subgraph, ["crab"], 4).value)


def bfs_oracle(nodes, edge_pairs, roots, k):
    """Plain set-based BFS, written independently of the store internals."""
    neighbors = {n: set() for n in nodes}
    for a, b in edge_pairs:
        neighbors[a].add(b)
        neighbors[b].add(a)
    dist = {r: 0 for r in roots}
    queue = list(roots)
    while queue:
        u = queue.pop(0)
        if dist[u] == k:
            continue
        for v in neighbors[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


@pytest.mark.parametrize("trial", range(10))
def test_extraction_matches_bfs_oracle(tmp_path, trial):
    rng = random.Random(trial)
    store = KGStore(str(tmp_path))
    kg = store.create(f"rand{trial}")
    n_nodes = rng.randint(5, 30)
    node_ids = [f"n{i}" for i in range(n_nodes)]
    kg.upsert_nodes([node_doc(i) for i in range(n_nodes)])
    n_edges = rng.randint(0, 3 * n_nodes)
    pairs = []
    docs = []
    for j in range(n_edges):
        a, b = rng.choice(node_ids), rng.choice(node_ids)
        pairs.append((a, b))
        docs.append(edge_doc(f"e{j}", a, b, w=rng.random() + 0.1))
    if docs:
        kg.upsert_edges(docs, mode="bulk")
    for k in (1, 2, 3):
        roots = rng.sample(node_ids, rng.randint(1, min(3, n_nodes)))
        sg = kg.extract_subgraph(roots, k)
        want = bfs_oracle(node_ids, pairs, roots, k)
        assert sg.hop_distance == want
        assert sg.node_ids == set(want)
        for e in sg.edges:
            assert e.in_id in want and e.out_id in want
        # induced edges: everything inside the node set is included
        included = {e.id for e in sg.edges}
        for j, (a, b) in enumerate(pairs):
            if a in want and b in want:
                assert f"e{j}" in included


# --- pruning ---------------------------------------------------------------

def make_subgraph(node_ids, edge_pairs, roots):
    nodes = tuple(KGNode(i, i) for i in sorted(node_ids))
    edges = tuple(KGEdge(f"e{j}", "rel", "", "", a, b, 1.0)
                  for j, (a, b) in enumerate(edge_pairs))
    return Subgraph(kg="g", roots=tuple(roots), nodes=nodes, edges=edges,
                    hop_distance={i: 0 for i in node_ids})


def test_prune_removes_isolated_nodes():
    sg = make_subgraph(["a", "b", "c", "z"], [("a", "b"), ("b", "c")], ["a"])
    pruned = prune_disconnected(sg)
    assert pruned.node_ids == {"a", "b", "c"}
    assert "z" not in pruned.hop_distance


def test_prune_is_idempotent_and_keeps_connected():
    sg = make_subgraph(["a", "b", "x", "y"], [("a", "b"), ("x", "y")], ["a"])
    once = prune_disconnected(sg)
    assert once.node_ids == {"a", "b"}
    assert prune_disconnected(once) == once
    whole = make_subgraph(["a", "b"], [("b", "a")], ["a"])
    assert prune_disconnected(whole).node_ids == {"a", "b"}


# --- entity linking --------------------------------------------------------

def test_linking_on_fixture(fixture_kg):
    links = fixture_kg.link_entities("Where does a crab live?")
    assert [(l.text, l.node_id) for l in links] == [("crab", "crab")]
    assert fixture_kg.link_entities("nothing matches here") == []


def test_linking_prefers_longest_match(store):
    kg = store.create("g")
    kg.upsert_nodes([
        {"_id": "salt", "name": "salt", "description": "", "type": "t"},
        {"_id": "salt-water", "name": "salt water", "description": "", "type": "t"},
        {"_id": "water", "name": "water", "description": "", "type": "t"},
    ])
    links = kg.link_entities("Salt water is salty")
    assert [l.node_id for l in links] == ["salt-water"]
    assert links[0].span == (0, 1)
    solo = kg.link_entities("salt on the table")
    assert [l.node_id for l in solo] == ["salt"]


def test_linking_is_non_overlapping_left_to_right(store):
    kg = store.create("g")
    kg.upsert_nodes([
        {"_id": "a", "name": "red fish", "description": "", "type": "t"},
        {"_id": "b", "name": "fish tank", "description": "", "type": "t"},
    ])
    links = kg.link_entities("the red fish tank")
    # "red fish" consumes the middle words, so "fish tank" cannot match
    assert [l.node_id for l in links] == ["a"]
