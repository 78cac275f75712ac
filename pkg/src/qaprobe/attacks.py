"""Saliency-guided adversarial attacks on extractive QA inputs.

HotFlip swaps high-saliency words for embedding neighbors to change the
answer; input reduction strips low-saliency question words while the
answer stays put; sub-span and top-k shrink the context to its most
salient part and count an UNCHANGED answer as success, exposing
question-context shortcut matching.

Every attack reports its edits against positions in the original input,
and the modified input is literally the replay of those edits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput, InvalidParam
from .model import forward
from .model.params import ModelParams
from .saliency import INTEGRATED_GRAD, SaliencyMap, compute_saliency
from .tokenizer import SEG_CONTEXT, SEG_QUESTION, TokenizedInput, rebuild
from .vocab import NUM_SPECIAL, Vocabulary

HOTFLIP = "hotflip"
INPUT_REDUCTION = "input_reduction"
SUB_SPAN = "sub_span"
TOP_K = "top_k"
ATTACK_METHODS = (HOTFLIP, INPUT_REDUCTION, SUB_SPAN, TOP_K)

REPLACE = "replace"
DELETE = "delete"
KEEP_WINDOW = "keep_window"
KEEP_SET = "keep_set"

DEFAULT_NEIGHBORS = 10
DEFAULT_BUDGET = 3
DEFAULT_WINDOW = 10


@dataclass(frozen=True)
class Edit:
    kind: str
    positions: tuple[int, ...]  # token positions in the ORIGINAL input
    original: tuple[str, ...]
    replacement: Optional[str] = None


@dataclass(frozen=True)
class AttackResult:
    method: str
    original_input: TokenizedInput
    modified_input: TokenizedInput
    edits: tuple[Edit, ...]
    original_prediction: object
    new_prediction: object
    success: bool
    saliency_basis: SaliencyMap


def apply_edits(original: TokenizedInput, edits: Sequence[Edit],
                vocab: Vocabulary) -> TokenizedInput:
    """Replay an edit list; the single source of truth for edit semantics."""
    question = {t.position: t.surface for t in original.tokens
                if t.segment == SEG_QUESTION}
    context = {t.position: t.surface for t in original.tokens
               if t.segment == SEG_CONTEXT}
    candidates: dict[int, list[str]] = {}
    for t in original.tokens:
        if t.candidate_index is not None:
            candidates.setdefault(t.candidate_index, []).append(t.surface)

    deleted: set[int] = set()
    kept: Optional[set[int]] = None
    for e in edits:
        if e.kind == REPLACE:
            if len(e.positions) != 1 or e.replacement is None:
                raise InvalidParam("replace edits carry one position and a replacement")
            (p,) = e.positions
            if p in question:
                question[p] = e.replacement
            elif p in context:
                context[p] = e.replacement
            else:
                raise InvalidParam(f"replace targets non-editable position {p}")
        elif e.kind == DELETE:
            for p in e.positions:
                if p not in question and p not in context:
                    raise InvalidParam(f"delete targets non-editable position {p}")
                deleted.add(p)
        elif e.kind in (KEEP_WINDOW, KEEP_SET):
            if any(p not in context for p in e.positions):
                raise InvalidParam(f"{e.kind} positions must lie in the context")
            keep = set(e.positions)
            kept = keep if kept is None else kept & keep
        else:
            raise InvalidParam(f"unknown edit kind {e.kind!r}")

    q_words = [s for p, s in sorted(question.items()) if p not in deleted]
    c_words = [s for p, s in sorted(context.items())
               if p not in deleted and (kept is None or p in kept)]
    cand_words = [candidates[i] for i in sorted(candidates)] or None
    return rebuild(q_words, c_words if context else None, cand_words, vocab)


def nearest_neighbors(word_id: int, params: ModelParams,
                      m: int = DEFAULT_NEIGHBORS) -> list[tuple[int, float]]:
    """Top-m vocabulary ids by embedding cosine similarity to word_id.

    Specials and the query itself are excluded; ties broken by ascending id.
    """
    if m < 1:
        raise InvalidParam("neighbor count must be >= 1")
    if word_id < NUM_SPECIAL or word_id >= params.vocab_size:
        raise InvalidParam(f"word id {word_id} is special or out of range")
    E = params.E
    q = E[word_id]
    norms = np.linalg.norm(E, axis=1)
    denom = norms * np.linalg.norm(q)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0.0, E @ q / denom, 0.0)
    sims[np.all(E == q, axis=1)] = 1.0  # identical rows are exact matches
    order = sorted(range(NUM_SPECIAL, params.vocab_size),
                   key=lambda i: (-sims[i], i))
    return [(i, float(sims[i])) for i in order if i != word_id][:m]


def _saliency(method: str, inp: TokenizedInput, params: ModelParams) -> SaliencyMap:
    return compute_saliency(method, inp, params)


def hotflip(inp: TokenizedInput, params: ModelParams, vocab: Vocabulary,
            saliency_method: str = INTEGRATED_GRAD, budget: int = DEFAULT_BUDGET,
            m: int = DEFAULT_NEIGHBORS, segment: str = SEG_QUESTION) -> AttackResult:
    """Greedy word substitution driven by a one-shot saliency ranking.

    Positions are visited in descending saliency order; at each one the
    committed neighbor is the one minimizing the original prediction's
    score. Stops early once the answer string changes.
    """
    if budget < 1:
        raise InvalidParam("budget must be >= 1")
    if m < 1:
        raise InvalidParam("neighbor count must be >= 1")
    if segment not in (SEG_QUESTION, SEG_CONTEXT):
        raise InvalidParam(f"unknown target segment {segment!r}")
    base = forward(inp, params)
    original_prediction = base.prediction
    smap = _saliency(saliency_method, inp, params)
    positions = (inp.question_positions if segment == SEG_QUESTION
                 else inp.context_positions)
    # UNK tokens have no embedding identity of their own; skip them
    flippable = [p for p in positions if inp.tokens[p].id >= NUM_SPECIAL]
    if not flippable:
        raise InvalidParam("target segment has no editable tokens")
    ranked = sorted(flippable, key=lambda p: (-smap.scores[p], p))

    edits: list[Edit] = []
    modified = inp
    new_prediction = original_prediction
    success = False
    for p in ranked[:budget]:
        best = None
        for cand_id, _sim in nearest_neighbors(inp.tokens[p].id, params, m):
            trial_edit = Edit(REPLACE, (p,), (inp.tokens[p].surface,),
                              vocab.surface(cand_id))
            trial_input = apply_edits(inp, edits + [trial_edit], vocab)
            f = forward(trial_input, params, target=base.target).F
            if best is None or f < best[0]:
                best = (f, trial_edit, trial_input)
        edits.append(best[1])
        modified = best[2]
        new_prediction = forward(modified, params).prediction
        if new_prediction.answer != original_prediction.answer:
            success = True
            break
    return AttackResult(HOTFLIP, inp, modified, tuple(edits),
                        original_prediction, new_prediction, success, smap)


def input_reduction(inp: TokenizedInput, params: ModelParams, vocab: Vocabulary,
                    saliency_method: str = INTEGRATED_GRAD,
                    beam_width: int = 1) -> AttackResult:
    """Delete low-saliency question words while the answer stays fixed.

    beam_width=1 is the plain greedy loop: each round removes the current
    lowest-saliency question word if the argmax answer survives, else
    stops. Wider beams branch over the beam_width lowest-saliency
    deletions per round and return the shortest surviving question.
    """
    if beam_width < 1:
        raise InvalidParam("beam width must be >= 1")
    question = tuple((t.position, t.surface) for t in inp.tokens
                     if t.segment == SEG_QUESTION)
    if len(question) < 2:
        raise InvalidParam("question needs at least two words to reduce")
    base = forward(inp, params)
    original_prediction = base.prediction
    basis = _saliency(saliency_method, inp, params)

    context_words = [t.surface for t in inp.tokens if t.segment == SEG_CONTEXT]
    cand_map: dict[int, list[str]] = {}
    for t in inp.tokens:
        if t.candidate_index is not None:
            cand_map.setdefault(t.candidate_index, []).append(t.surface)
    cands = [cand_map[i] for i in sorted(cand_map)] or None

    def build(words: tuple[tuple[int, str], ...]) -> TokenizedInput:
        return rebuild([s for _, s in words],
                       context_words if context_words else None, cands, vocab)

    # each live entry: (question words with original positions, deletion trail)
    live: list[tuple[tuple[tuple[int, str], ...], tuple[int, ...]]] = [(question, ())]
    terminal: list[tuple[tuple[tuple[int, str], ...], tuple[int, ...]]] = []
    seen = {question}
    while live:
        upcoming = []
        for cand, trail in live:
            if len(cand) == 1:
                terminal.append((cand, trail))
                continue
            cin = build(cand)
            smap = _saliency(saliency_method, cin, params)
            qpos = cin.question_positions
            order = sorted(range(len(cand)),
                           key=lambda i: (smap.scores[qpos[i]], i))
            survived = False
            for i in order[:beam_width]:
                shorter = cand[:i] + cand[i + 1:]
                if shorter in seen:
                    survived = True  # another branch already owns this state
                    continue
                trial = build(shorter)
                if forward(trial, params).prediction.answer == original_prediction.answer:
                    seen.add(shorter)
                    upcoming.append((shorter, trail + (cand[i][0],)))
                    survived = True
            if not survived:
                # every tried deletion (the lowest-saliency one included)
                # broke the answer: one-step minimal
                terminal.append((cand, trail))
        upcoming.sort(key=lambda item: len(item[0]))
        live = upcoming[:beam_width]
    best_words, best_trail = min(terminal, key=lambda item: len(item[0]))

    surfaces = dict(question)
    edits = tuple(Edit(DELETE, (p,), (surfaces[p],)) for p in best_trail)
    modified = apply_edits(inp, edits, vocab)
    new_prediction = forward(modified, params).prediction
    assert new_prediction.answer == original_prediction.answer
    return AttackResult(INPUT_REDUCTION, inp, modified, edits,
                        original_prediction, new_prediction,
                        success=len(best_trail) > 0, saliency_basis=basis)


def best_window(scores: Sequence[float], window: int) -> int:
    """Start index of the max-sum contiguous window (leftmost on ties)."""
    best_start, best_sum = 0, None
    for s in range(len(scores) - window + 1):
        total = sum(scores[s:s + window])  # recomputed per window; no drift
        if best_sum is None or total > best_sum:
            best_start, best_sum = s, total
    return best_start


def top_k_indices(scores: Sequence[float], k: int) -> tuple[int, ...]:
    """Indices of the k largest scores (ties to the left), ascending."""
    ranked = sorted(range(len(scores)), key=lambda i: (-scores[i], i))[:k]
    return tuple(sorted(ranked))


def sub_span(inp: TokenizedInput, params: ModelParams, vocab: Vocabulary,
             saliency_method: str = INTEGRATED_GRAD,
             window: Optional[int] = None) -> AttackResult:
    """Keep only the contiguous context window with maximal saliency mass."""
    ctx = inp.context_positions
    if not ctx:
        raise InvalidInput("input has no context to shrink")
    L = min(DEFAULT_WINDOW, len(ctx)) if window is None else window
    if not isinstance(L, int) or isinstance(L, bool) or not 1 <= L <= len(ctx):
        raise InvalidParam(f"window length must be an integer in [1, {len(ctx)}]")
    base = forward(inp, params)
    smap = _saliency(saliency_method, inp, params)
    best_start = best_window([smap.scores[p] for p in ctx], L)
    kept = ctx[best_start:best_start + L]
    edit = Edit(KEEP_WINDOW, tuple(kept),
                tuple(inp.surfaces[p] for p in kept))
    modified = apply_edits(inp, (edit,), vocab)
    new_prediction = forward(modified, params).prediction
    return AttackResult(SUB_SPAN, inp, modified, (edit,), base.prediction,
                        new_prediction,
                        success=new_prediction.answer == base.prediction.answer,
                        saliency_basis=smap)


def top_k(inp: TokenizedInput, params: ModelParams, vocab: Vocabulary,
          saliency_method: str = INTEGRATED_GRAD,
          k: Optional[int] = None) -> AttackResult:
    """Keep only the k most salient context words, in original order."""
    ctx = inp.context_positions
    if not ctx:
        raise InvalidInput("input has no context to shrink")
    kk = min(DEFAULT_WINDOW, len(ctx)) if k is None else k
    if not isinstance(kk, int) or isinstance(kk, bool) or not 1 <= kk <= len(ctx):
        raise InvalidParam(f"k must be an integer in [1, {len(ctx)}]")
    base = forward(inp, params)
    smap = _saliency(saliency_method, inp, params)
    chosen = [ctx[i] for i in top_k_indices([smap.scores[p] for p in ctx], kk)]
    edit = Edit(KEEP_SET, tuple(chosen), tuple(inp.surfaces[p] for p in chosen))
    modified = apply_edits(inp, (edit,), vocab)
    new_prediction = forward(modified, params).prediction
    return AttackResult(TOP_K, inp, modified, (edit,), base.prediction,
                        new_prediction,
                        success=new_prediction.answer == base.prediction.answer,
                        saliency_basis=smap)


def run_attack(method: str, inp: TokenizedInput, params: ModelParams,
               vocab: Vocabulary, saliency_method: str = INTEGRATED_GRAD,
               options: Optional[dict] = None) -> AttackResult:
    """Dispatch by attack name with per-method option validation."""
    opts = dict(options or {})
    allowed = {HOTFLIP: ("budget", "neighbors", "segment"),
               INPUT_REDUCTION: ("beam_width",),
               SUB_SPAN: ("window",),
               TOP_K: ("k",)}
    if method not in allowed:
        raise InvalidParam(f"unknown attack method {method!r}")
    stray = set(opts) - set(allowed[method])
    if stray:
        raise InvalidParam(f"unsupported options for {method}: {sorted(stray)}")
    if method == HOTFLIP:
        return hotflip(inp, params, vocab, saliency_method,
                       budget=opts.get("budget", DEFAULT_BUDGET),
                       m=opts.get("neighbors", DEFAULT_NEIGHBORS),
                       segment=opts.get("segment", SEG_QUESTION))
    if method == INPUT_REDUCTION:
        return input_reduction(inp, params, vocab, saliency_method,
                               beam_width=opts.get("beam_width", 1))
    if method == SUB_SPAN:
        return sub_span(inp, params, vocab, saliency_method,
                        window=opts.get("window"))
    return top_k(inp, params, vocab, saliency_method, k=opts.get("k"))
