"""Interpretable graph reasoner for multiple-choice questions over a KG.

Pipeline: link question/candidate entities, pull their k-hop
neighborhood, score node relevance against the question, run a few
rounds of edge-attention message passing, then rank candidates by the
dot product between the pooled question state and each candidate's node
state. Every intermediate (relevance per node, attention per edge) is
kept on the WorkingGraph for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParam, NoEntitiesFound
from .kg import KnowledgeGraph, Subgraph
from .model.params import ModelParams
from .tokenizer import split_words
from .vocab import Vocabulary

ROLE_QUESTION = "question"
ROLE_CANDIDATE = "answer_candidate"
ROLE_OTHER = "other"

SORT_RELEVANCE = "relevance"
SORT_INCOMING_ATTENTION = "incoming_attention"
SORT_MODES = (SORT_RELEVANCE, SORT_INCOMING_ATTENTION)

DEFAULT_HOPS = 2
DEFAULT_LAYERS = 2
DEFAULT_SEED = 0

# edge weights enter attention as log(weight); keep the log finite
MIN_EDGE_WEIGHT = 1e-12


@dataclass
class WorkingGraph:
    subgraph: Subgraph
    question: str
    candidates: tuple[str, ...]
    node_role: dict[str, str]
    candidate_nodes: tuple[Optional[str], ...]  # first linked node per candidate
    relevance: dict[str, float] = field(default_factory=dict)
    states: dict[str, np.ndarray] = field(default_factory=dict)
    edge_attention: dict[str, float] = field(default_factory=dict)
    incoming_attention_sum: dict[str, float] = field(default_factory=dict)
    answer_scores: tuple[float, ...] = ()
    prediction: Optional[str] = None


def build_working_graph(question: str, candidates: list[str],
                        kg: KnowledgeGraph, k: int = DEFAULT_HOPS) -> WorkingGraph:
    """Link entities, extract their k-hop subgraph, and assign roles.

    A node matched by both the question and a candidate counts as an
    answer candidate.
    """
    if not isinstance(candidates, (list, tuple)) or len(candidates) < 2:
        raise InvalidParam("need at least two answer candidates")
    question_links = kg.link_entities(question)
    candidate_links = [kg.link_entities(c) for c in candidates]
    roots: list[str] = [link.node_id for link in question_links]
    for links in candidate_links:
        roots.extend(link.node_id for link in links)
    roots = list(dict.fromkeys(roots))
    if not roots:
        raise NoEntitiesFound(
            "neither the question nor any candidate matched a node name")
    sg = kg.extract_subgraph(roots, k)
    role = {n.id: ROLE_OTHER for n in sg.nodes}
    for link in question_links:
        role[link.node_id] = ROLE_QUESTION
    for links in candidate_links:
        for link in links:
            role[link.node_id] = ROLE_CANDIDATE
    candidate_nodes = tuple(
        links[0].node_id if links else None for links in candidate_links)
    return WorkingGraph(subgraph=sg, question=question,
                        candidates=tuple(candidates), node_role=role,
                        candidate_nodes=candidate_nodes)


def _text_embedding(text: str, params: ModelParams, vocab: Vocabulary) -> np.ndarray:
    """Mean embedding-table row over the words of ``text`` (UNK fallback)."""
    words = split_words(text)
    if not words:
        return np.zeros(params.d)
    rows = params.E[[vocab.lookup(w) for w in words]]
    return rows.mean(axis=0)


def node_relevance(wg: WorkingGraph, params: ModelParams,
                   vocab: Vocabulary) -> WorkingGraph:
    """relevance(v) = logistic(<q_mean, name_mean(v)> / sqrt(d))."""
    q = _text_embedding(wg.question, params, vocab)
    scale = 1.0 / math.sqrt(params.d)
    for node in wg.subgraph.nodes:
        dot = float(q @ _text_embedding(node.name, params, vocab))
        wg.relevance[node.id] = 1.0 / (1.0 + math.exp(-dot * scale))
    return wg


def graph_attention_pass(wg: WorkingGraph, params: ModelParams,
                         vocab: Vocabulary, layers: int = DEFAULT_LAYERS,
                         seed: int = DEFAULT_SEED) -> WorkingGraph:
    """Edge-attention message passing with synchronous state updates.

    alpha(u -> v) = softmax over v's incoming edges of
    <Wq s_v, Wk s_u>/sqrt(d) + log(weight); s_v += sum alpha * Wv s_u.
    The projection matrices are drawn once from ``seed`` and never
    trained; the last layer's alphas are reported as edge attention.
    """
    if not isinstance(layers, int) or isinstance(layers, bool) or layers < 1:
        raise InvalidParam("layers must be a positive integer")
    if not wg.relevance:
        node_relevance(wg, params, vocab)
    d = params.d
    rng = np.random.default_rng(seed)
    Wq = rng.normal(0.0, 1.0 / math.sqrt(d), (d, d))
    Wk = rng.normal(0.0, 1.0 / math.sqrt(d), (d, d))
    Wv = rng.normal(0.0, 1.0 / math.sqrt(d), (d, d))

    states = {
        node.id: wg.relevance[node.id] * _text_embedding(node.name, params, vocab)
        for node in wg.subgraph.nodes
    }
    incoming: dict[str, list] = {node.id: [] for node in wg.subgraph.nodes}
    for edge in wg.subgraph.edges:
        incoming[edge.out_id].append(edge)

    scale = 1.0 / math.sqrt(d)
    attention: dict[str, float] = {}
    for _ in range(layers):
        attention = {}
        new_states = dict(states)
        for node in wg.subgraph.nodes:
            edges = incoming[node.id]
            if not edges:
                continue
            query = Wq @ states[node.id]
            logits = np.array([
                float(query @ (Wk @ states[e.in_id])) * scale
                + math.log(max(e.weight, MIN_EDGE_WEIGHT))
                for e in edges])
            logits -= logits.max()
            alphas = np.exp(logits)
            alphas /= alphas.sum()
            update = np.zeros(d)
            for e, alpha in zip(edges, alphas):
                attention[e.id] = float(alpha)
                update += float(alpha) * (Wv @ states[e.in_id])
            new_states[node.id] = states[node.id] + update
        states = new_states

    wg.states = states
    wg.edge_attention = attention
    wg.incoming_attention_sum = {
        node.id: float(sum(attention.get(e.id, 0.0) for e in incoming[node.id]))
        for node in wg.subgraph.nodes
    }
    return wg


def answer_scores(wg: WorkingGraph) -> WorkingGraph:
    """score(c) = <relevance-weighted mean question state, candidate state>.

    Candidates without a linked node score -inf; ties go to the earlier
    candidate. Pools over every node when no node carries the question
    role.
    """
    if not wg.states:
        raise InvalidParam("run the attention pass before scoring answers")
    pool_ids = [i for i, r in wg.node_role.items() if r == ROLE_QUESTION]
    if not pool_ids:
        pool_ids = sorted(wg.states)
    weights = np.array([wg.relevance[i] for i in pool_ids])
    pooled = np.average([wg.states[i] for i in pool_ids], axis=0, weights=weights)

    scores = []
    for node_id in wg.candidate_nodes:
        if node_id is None or node_id not in wg.states:
            scores.append(float("-inf"))
        else:
            scores.append(float(pooled @ wg.states[node_id]))
    wg.answer_scores = tuple(scores)
    if all(s == float("-inf") for s in scores):
        raise NoEntitiesFound("no answer candidate matched a node name")
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    wg.prediction = wg.candidates[best]
    return wg


def rank_nodes(wg: WorkingGraph, mode: str, top_n: Optional[int] = None) -> list[str]:
    """Node ids sorted descending by the chosen metric, ties by id."""
    if mode not in SORT_MODES:
        raise InvalidParam(f"unknown sort mode {mode!r}")
    if top_n is not None and (not isinstance(top_n, int) or isinstance(top_n, bool)
                              or top_n < 1):
        raise InvalidParam("top_n must be a positive integer")
    metric = wg.relevance if mode == SORT_RELEVANCE else wg.incoming_attention_sum
    ordered = sorted((n.id for n in wg.subgraph.nodes),
                     key=lambda i: (-metric.get(i, 0.0), i))
    return ordered if top_n is None else ordered[:top_n]


def run_graph_skill(question: str, candidates: list[str], kg: KnowledgeGraph,
                    params: ModelParams, vocab: Vocabulary, k: int = DEFAULT_HOPS,
                    layers: int = DEFAULT_LAYERS, seed: int = DEFAULT_SEED) -> WorkingGraph:
    """The full build -> relevance -> attention -> score pipeline."""
    wg = build_working_graph(question, candidates, kg, k)
    node_relevance(wg, params, vocab)
    graph_attention_pass(wg, params, vocab, layers=layers, seed=seed)
    return answer_scores(wg)
