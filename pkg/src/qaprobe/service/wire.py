"""Deterministic JSON encoding for every response body.

Floats are written with 9 significant digits and -0.0 collapses to 0, so
replaying a request reproduces the response byte for byte. Dict order is
the construction order of the encoders below; nothing here sorts keys at
dump time.
"""

from __future__ import annotations

import math
from typing import Optional

from ..attacks import AttackResult, Edit
from ..kg import KGEdge, KGNode, Subgraph
from ..model import Prediction
from ..reasoner import WorkingGraph
from ..saliency import SaliencyMap


def _encode(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite float in wire payload")
        out.append("0" if obj == 0.0 else format(obj, ".9g"))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise ValueError(f"non-string key {key!r} in wire payload")
            if i:
                out.append(",")
            out.append(_escape(key))
            out.append(":")
            _encode(value, out)
        out.append("}")
    else:
        raise ValueError(f"cannot encode {type(obj).__name__} for the wire")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t",
            "\b": "\\b", "\f": "\\f"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def dumps_canonical(obj) -> str:
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


# -- encoders (field order is the wire contract) ----------------------------

def prediction_wire(pred: Prediction) -> dict:
    return {
        "answer": pred.answer,
        "span": list(pred.span) if pred.span is not None else None,
        "candidate_index": pred.candidate_index,
        "probability": pred.probability,
        "score": None if pred.score == float("-inf") else pred.score,
    }


def saliency_wire(smap: SaliencyMap) -> dict:
    return {
        "method": smap.method,
        "scores": list(smap.scores),
        "tokens": list(smap.tokens),
        "normalization": smap.normalization,
        "params_used": dict(smap.params_used),
    }


def edit_wire(edit: Edit) -> dict:
    return {
        "kind": edit.kind,
        "positions": list(edit.positions),
        "original": list(edit.original),
        "replacement": edit.replacement,
    }


def attack_wire(result: AttackResult) -> dict:
    return {
        "method": result.method,
        "edits": [edit_wire(e) for e in result.edits],
        "original_prediction": prediction_wire(result.original_prediction),
        "new_prediction": prediction_wire(result.new_prediction),
        "success": result.success,
        "saliency_basis": saliency_wire(result.saliency_basis),
    }


def node_wire(node: KGNode) -> dict:
    return {"_id": node.id, "name": node.name,
            "description": node.description, "type": node.type}


def edge_wire(edge: KGEdge) -> dict:
    return {"_id": edge.id, "name": edge.name,
            "description": edge.description, "type": edge.type,
            "in_id": edge.in_id, "out_id": edge.out_id,
            "weight": float(edge.weight)}


def subgraph_wire(sg: Subgraph) -> dict:
    return {
        "kg": sg.kg,
        "roots": list(sg.roots),
        "nodes": [node_wire(n) for n in sg.nodes],
        "edges": [edge_wire(e) for e in sg.edges],
        "hop_distance": {i: sg.hop_distance[i] for i in sorted(sg.hop_distance)},
    }


def working_graph_wire(wg: WorkingGraph) -> dict:
    scores = {
        cand: None if score == float("-inf") else score
        for cand, score in zip(wg.candidates, wg.answer_scores)
    }
    return {
        "nodes": [
            {
                "id": n.id,
                "name": n.name,
                "role": wg.node_role[n.id],
                "relevance": wg.relevance[n.id],
                "incoming_attention_sum": wg.incoming_attention_sum[n.id],
            }
            for n in wg.subgraph.nodes
        ],
        "edges": [
            {
                "id": e.id,
                "name": e.name,
                "in_id": e.in_id,
                "out_id": e.out_id,
                "weight": float(e.weight),
                "attention": wg.edge_attention.get(e.id, 0.0),
            }
            for e in wg.subgraph.edges
        ],
        "answer_scores": scores,
        "prediction": wg.prediction,
    }
