"""FastAPI application over the analysis modules.

Request bodies are validated by hand (no schema framework) and every
success body goes through wire.dumps_canonical, so replaying a request
reproduces the response byte for byte. Module exceptions map to one
(status, machine code) pair each; compute work runs on a worker thread
under the configured wall-clock timeout.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import time
from typing import Callable, Optional

import numpy as np
from fastapi import FastAPI, Request, Response
from starlette.exceptions import HTTPException as StarletteHTTPException
from starlette.staticfiles import StaticFiles

from ..attacks import HOTFLIP, apply_edits, run_attack
from ..errors import (
    Conflict,
    DanglingEdge,
    InputTooLong,
    InvalidDocument,
    InvalidInput,
    InvalidLabel,
    InvalidMap,
    InvalidParam,
    InvalidTarget,
    NoEntitiesFound,
    NotFound,
    QaProbeError,
    UnsupportedSkill,
)
from ..kg import KGStore, edge_from_doc, node_from_doc
from ..model import CandidateTarget, Prediction, SpanTarget, forward, top_predictions
from ..reasoner import run_graph_skill
from ..saliency import INTEGRATED_GRAD, SMOOTHGRAD, compute_saliency
from ..tokenizer import tokenize
from .config import ServiceConfig
from .registry import Skill, SkillRegistry
from .wire import (
    attack_wire,
    dumps_canonical,
    prediction_wire,
    saliency_wire,
    subgraph_wire,
    working_graph_wire,
)

log = logging.getLogger("qaprobe.service")

_ERROR_CODES = {
    InvalidInput: (400, "INVALID_INPUT"),
    InputTooLong: (400, "INPUT_TOO_LONG"),
    InvalidTarget: (400, "INVALID_TARGET"),
    InvalidLabel: (400, "INVALID_LABEL"),
    InvalidParam: (400, "INVALID_PARAM"),
    InvalidMap: (400, "INVALID_MAP"),
    InvalidDocument: (400, "INVALID_DOCUMENT"),
    DanglingEdge: (400, "DANGLING_EDGE"),
    UnsupportedSkill: (400, "UNSUPPORTED_SKILL"),
    NotFound: (404, "NOT_FOUND"),
    Conflict: (409, "CONFLICT"),
    NoEntitiesFound: (422, "NO_ENTITIES_FOUND"),
}


class ApiError(Exception):
    """Service-layer error with an explicit status and machine code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


def _reply(payload, status: int = 200) -> Response:
    return Response(content=dumps_canonical(payload), status_code=status,
                    media_type="application/json")


def _error(status: int, code: str, message: str) -> Response:
    return _reply({"code": code, "message": message}, status=status)


# -- request body helpers ----------------------------------------------------

async def _json_object(request: Request) -> dict:
    raw = await request.body()
    try:
        doc = json.loads(raw if raw else b"{}")
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise InvalidInput(f"request body is not valid JSON: {err}")
    if not isinstance(doc, dict):
        raise InvalidInput("request body must be a JSON object")
    return doc


def _check_fields(body: dict, allowed: set) -> None:
    extra = set(body) - allowed
    if extra:
        raise InvalidInput(f"unknown body fields {sorted(extra)}")


def _req_str(body: dict, key: str) -> str:
    value = body.get(key)
    if not isinstance(value, str):
        raise InvalidInput(f"field {key!r} must be a string")
    return value


def _str_list(body: dict, key: str) -> list:
    value = body.get(key)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise InvalidInput(f"field {key!r} must be a list of strings")
    return value


def _opt_int(body: dict, key: str, default: int) -> int:
    value = body.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInput(f"field {key!r} must be an integer")
    return value


def _opt_params(body: dict) -> dict:
    value = body.get("params") or {}
    if not isinstance(value, dict):
        raise InvalidInput("field 'params' must be an object")
    return dict(value)


def _skill_input(skill: Skill, body: dict, vocab):
    """Tokenize a request body against the skill's kind, or 400."""
    question = _req_str(body, "question")
    has_context = body.get("context") is not None
    has_candidates = body.get("candidates") is not None
    if skill.kind == "extractive":
        if has_candidates or not has_context:
            raise ApiError(400, "KIND_MISMATCH",
                           f"skill {skill.id!r} is extractive; send 'context'")
        return tokenize(question, context=_req_str(body, "context"), vocab=vocab)
    if skill.kind == "multiple_choice":
        if has_context or not has_candidates:
            raise ApiError(400, "KIND_MISMATCH",
                           f"skill {skill.id!r} is multiple choice; send 'candidates'")
        return tokenize(question, candidates=_str_list(body, "candidates"),
                        vocab=vocab)
    raise ApiError(400, "KIND_MISMATCH",
                   f"skill {skill.id!r} has no token-level inputs")


def _graph_predictions(wg) -> list[Prediction]:
    """Ranked candidate predictions from a scored working graph. The
    softmax runs over linked candidates only; unlinked ones keep -inf
    score and probability 0."""
    scores = np.array(wg.answer_scores, dtype=float)
    finite = np.isfinite(scores)
    probs = np.zeros(len(scores))
    if finite.any():
        shifted = np.exp(scores[finite] - scores[finite].max())
        probs[finite] = shifted / shifted.sum()
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [
        Prediction(answer=wg.candidates[i], span=None, candidate_index=i,
                   probability=float(probs[i]), score=float(scores[i]))
        for i in order
    ]


def create_app(config: Optional[ServiceConfig] = None,
               store: Optional[KGStore] = None,
               registry: Optional[SkillRegistry] = None) -> FastAPI:
    cfg = config if config is not None else ServiceConfig()
    if store is None:
        store = KGStore(cfg.data_dir, hop_cap=cfg.hop_cap)
    if registry is None:
        registry = SkillRegistry(os.path.join(cfg.data_dir, "skills.json"),
                                 store=store)

    app = FastAPI(title="qaprobe", docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.state.config = cfg
    app.state.store = store
    app.state.registry = registry

    async def _run(fn: Callable):
        """Run a compute closure off the event loop, bounded by the
        configured timeout. The worker thread is not cancelled on
        timeout; the request just stops waiting for it."""
        loop = asyncio.get_running_loop()
        try:
            return await asyncio.wait_for(loop.run_in_executor(None, fn),
                                          timeout=cfg.timeout_seconds)
        except asyncio.TimeoutError:
            raise ApiError(504, "TIMEOUT",
                           f"computation exceeded {cfg.timeout_seconds:g}s")

    # -- error mapping -------------------------------------------------------

    @app.exception_handler(QaProbeError)
    async def _module_error(request: Request, err: QaProbeError):
        for cls, (status, code) in _ERROR_CODES.items():
            if isinstance(err, cls):
                return _error(status, code, str(err))
        return _error(500, "INTERNAL", str(err))

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, err: ApiError):
        return _error(err.status, err.code, str(err))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, err: StarletteHTTPException):
        code = {404: "NOT_FOUND", 405: "METHOD_NOT_ALLOWED"}.get(
            err.status_code, f"HTTP_{err.status_code}")
        return _error(err.status_code, code, str(err.detail))

    # -- request log: one JSON line each -------------------------------------

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        log.info(json.dumps({
            "time": round(time.time(), 3),
            "method": request.method,
            "path": request.url.path,
            "status": response.status_code,
            "ms": round((time.perf_counter() - started) * 1000.0, 3),
        }))
        return response

    # -- skill registry ------------------------------------------------------

    @app.get("/skills")
    async def list_skills():
        return _reply({"skills": [s.doc() for s in registry.list()]})

    @app.post("/skills")
    async def register_skill(request: Request):
        body = await _json_object(request)
        skill = registry.register(body)
        return _reply(skill.doc())

    @app.get("/skills/{skill_id}")
    async def get_skill(skill_id: str):
        return _reply(registry.get(skill_id).doc())

    # -- query ---------------------------------------------------------------

    @app.post("/skills/{skill_id}/query")
    async def query_skill(skill_id: str, request: Request):
        skill = registry.get(skill_id)
        body = await _json_object(request)
        _check_fields(body, {"question", "context", "candidates"})

        if skill.kind == "graph_reasoner":
            question = _req_str(body, "question")
            if body.get("context") is not None:
                raise ApiError(400, "KIND_MISMATCH",
                               f"skill {skill.id!r} reasons over candidates")
            candidates = _str_list(body, "candidates")
            kg = store.get(skill.kg)
            params, vocab = registry.model_for(skill)

            def compute():
                wg = run_graph_skill(question, candidates, kg, params, vocab,
                                     k=cfg.reasoner_hops,
                                     layers=cfg.reasoner_layers,
                                     seed=cfg.reasoner_seed)
                return _graph_predictions(wg)

            preds = await _run(compute)
        else:
            params, vocab = registry.model_for(skill)
            inp = _skill_input(skill, body, vocab)

            def compute():
                fr = forward(inp, params)
                return top_predictions(fr, limit=3)

            preds = await _run(compute)
        return _reply({"skill": skill.id, "kind": skill.kind,
                       "predictions": [prediction_wire(p) for p in preds]})

    # -- explain -------------------------------------------------------------

    @app.post("/skills/{skill_id}/explain")
    async def explain_skill(skill_id: str, request: Request):
        skill = registry.get(skill_id)
        body = await _json_object(request)
        _check_fields(body, {"question", "context", "candidates", "method",
                             "prediction_index", "params"})
        if skill.kind == "graph_reasoner":
            raise UnsupportedSkill(
                "saliency explanations need a token-level skill")
        method = _req_str(body, "method") if "method" in body \
            else cfg.saliency_method
        index = _opt_int(body, "prediction_index", 0)
        if index < 0:
            raise InvalidParam(f"prediction_index must be >= 0, got {index}")
        options = _opt_params(body)
        if method == INTEGRATED_GRAD:
            options.setdefault("steps", cfg.ig_steps)
        elif method == SMOOTHGRAD:
            options.setdefault("samples", cfg.smoothgrad_samples)
            options.setdefault("seed", cfg.smoothgrad_seed)
        params, vocab = registry.model_for(skill)
        inp = _skill_input(skill, body, vocab)

        def compute():
            fr = forward(inp, params)
            preds = top_predictions(fr, limit=index + 1)
            if index >= len(preds):
                raise InvalidParam(
                    f"prediction_index {index} out of range; "
                    f"this input has {len(preds)} predictions")
            pred = preds[index]
            target = SpanTarget(*pred.span) if pred.span is not None \
                else CandidateTarget(pred.candidate_index)
            smap = compute_saliency(method, inp, params, target=target,
                                    options=options)
            return pred, smap

        pred, smap = await _run(compute)
        return _reply({"skill": skill.id, "prediction": prediction_wire(pred),
                       "saliency": saliency_wire(smap)})

    # -- attack --------------------------------------------------------------

    @app.post("/skills/{skill_id}/attack")
    async def attack_skill(skill_id: str, request: Request):
        skill = registry.get(skill_id)
        body = await _json_object(request)
        _check_fields(body, {"question", "context", "method",
                             "saliency_method", "params"})
        if skill.kind != "extractive":
            raise UnsupportedSkill(
                f"attacks support extractive skills only, not {skill.kind}")
        method = _req_str(body, "method")
        saliency_method = _req_str(body, "saliency_method") \
            if "saliency_method" in body else cfg.saliency_method
        options = _opt_params(body)
        if method == HOTFLIP:
            options.setdefault("budget", cfg.hotflip_budget)
            options.setdefault("neighbors", cfg.hotflip_neighbors)
        params, vocab = registry.model_for(skill)
        inp = _skill_input(skill, body, vocab)

        def compute():
            result = run_attack(method, inp, params, vocab,
                                saliency_method=saliency_method,
                                options=options)
            # boundary re-check: the edit list alone must rebuild the input
            replayed = apply_edits(result.original_input, result.edits, vocab)
            if replayed.ids != result.modified_input.ids:
                raise ApiError(500, "INTERNAL",
                               "edit replay does not reproduce the attack")
            return result

        result = await _run(compute)
        return _reply({"skill": skill.id, **attack_wire(result)})

    # -- working graph -------------------------------------------------------

    @app.post("/skills/{skill_id}/graph")
    async def graph_skill(skill_id: str, request: Request):
        skill = registry.get(skill_id)
        body = await _json_object(request)
        _check_fields(body, {"question", "candidates", "hops"})
        if skill.kind != "graph_reasoner":
            raise ApiError(400, "KIND_MISMATCH",
                           f"skill {skill.id!r} does not expose a graph")
        question = _req_str(body, "question")
        candidates = _str_list(body, "candidates")
        hops = _opt_int(body, "hops", cfg.reasoner_hops)
        kg = store.get(skill.kg)
        params, vocab = registry.model_for(skill)

        def compute():
            return run_graph_skill(question, candidates, kg, params, vocab,
                                   k=hops, layers=cfg.reasoner_layers,
                                   seed=cfg.reasoner_seed)

        wg = await _run(compute)
        return _reply({"skill": skill.id, "hops": hops,
                       **working_graph_wire(wg)})

    # -- datastore -----------------------------------------------------------

    @app.get("/datastores/kg")
    async def list_kgs():
        return _reply({"kgs": store.list_names()})

    @app.post("/datastores/kg/{name}")
    async def create_kg(name: str):
        kg = store.create(name)
        return _reply({"name": kg.name, "nodes": kg.node_count(),
                       "edges": kg.edge_count()})

    def _parse_lines(raw: bytes, parse: Callable) -> list:
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as err:
            raise InvalidDocument(f"body is not UTF-8: {err}")
        docs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as err:
                raise InvalidDocument(f"line {lineno}: not valid JSON: {err}")
            try:
                parse(doc)  # per-line validation so errors carry the line
            except InvalidDocument as err:
                raise InvalidDocument(f"line {lineno}: {err}")
            docs.append(doc)
        return docs

    @app.post("/datastores/kg/{name}/nodes")
    async def upload_nodes(name: str, request: Request):
        kg = store.get(name)
        docs = _parse_lines(await request.body(), node_from_doc)
        count = await _run(lambda: kg.upsert_nodes(docs))
        return _reply({"count": count})

    @app.post("/datastores/kg/{name}/edges")
    async def upload_edges(name: str, request: Request):
        kg = store.get(name)
        mode = request.query_params.get("mode", "bulk")
        if mode not in ("strict", "bulk"):
            raise InvalidParam(f"mode must be 'strict' or 'bulk', got {mode!r}")
        docs = _parse_lines(await request.body(), edge_from_doc)
        count = await _run(lambda: kg.upsert_edges(docs, mode=mode))
        return _reply({"count": count})

    @app.post("/datastores/kg/{name}/subgraph")
    async def kg_subgraph(name: str, request: Request):
        kg = store.get(name)
        body = await _json_object(request)
        _check_fields(body, {"roots", "hops"})
        roots = _str_list(body, "roots")
        if "hops" not in body:
            raise InvalidInput("field 'hops' is required")
        hops = _opt_int(body, "hops", 0)
        sg = await _run(lambda: kg.extract_subgraph(roots, hops))
        return _reply(subgraph_wire(sg))

    if cfg.static_dir and os.path.isdir(cfg.static_dir):
        app.mount("/ui", StaticFiles(directory=cfg.static_dir, html=True),
                  name="ui")

    return app
