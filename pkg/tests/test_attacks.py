"""Brute-force oracles for the four attacks and the edit-replay contract."""

import numpy as np
import pytest

from qaprobe.attacks import (
    Edit,
    apply_edits,
    hotflip,
    input_reduction,
    nearest_neighbors,
    run_attack,
    sub_span,
    top_k,
)
from qaprobe.errors import InvalidParam
from qaprobe.model import forward, init_params
from qaprobe.saliency import compute_saliency
from qaprobe.tokenizer import tokenize
from qaprobe.vocab import NUM_SPECIAL, UNK_ID, Vocabulary

WORDS = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
         "hotel", "india", "juliet", "kilo", "lima", "?", "."]


def make_case(seed, ctx_len=(6, 12)):
    rng = np.random.default_rng(seed)
    vocab = Vocabulary(WORDS)
    params = init_params(len(vocab), d=24, heads=4, dff=32, seed=seed)
    q = " ".join(rng.choice(WORDS[:12], size=int(rng.integers(3, 6))))
    c = " ".join(rng.choice(WORDS[:12], size=int(rng.integers(*ctx_len))))
    return tokenize(q, c, None, vocab), params, vocab


# --- edit replay -----------------------------------------------------------

def test_replace_and_delete_replay(small_vocab):
    inp = tokenize("what color is the sky?", "the sky is blue today", None,
                   small_vocab)
    edits = [
        Edit("replace", (2,), ("color",), "green"),
        Edit("delete", (1,), ("what",)),
    ]
    out = apply_edits(inp, edits, small_vocab)
    assert out.question_text == "green is the sky ?"
    assert out.context_text == inp.context_text


def test_keep_window_restricts_context(small_vocab):
    inp = tokenize("what?", "the sky is blue today", None, small_vocab)
    ctx = inp.context_positions
    edit = Edit("keep_window", tuple(ctx[1:4]),
                tuple(inp.surfaces[p] for p in ctx[1:4]))
    out = apply_edits(inp, (edit,), small_vocab)
    assert out.context_text == "sky is blue"


def test_edits_never_touch_special_tokens(small_vocab):
    inp = tokenize("what?", "the sky", None, small_vocab)
    with pytest.raises(InvalidParam):
        apply_edits(inp, [Edit("replace", (0,), ("[CLS]",), "sky")], small_vocab)
    with pytest.raises(InvalidParam):
        apply_edits(inp, [Edit("delete", (3,), ("[SEP]",))], small_vocab)
    with pytest.raises(InvalidParam):
        apply_edits(inp, [Edit("keep_window", (1,), ("what",))], small_vocab)


# --- nearest neighbors -----------------------------------------------------

def test_neighbors_match_brute_force_argsort():
    _, params, vocab = make_case(0)
    for word_id in range(NUM_SPECIAL, len(vocab)):
        got = nearest_neighbors(word_id, params, m=5)
        E = params.E
        sims = {}
        for other in range(NUM_SPECIAL, len(vocab)):
            if other == word_id:
                continue
            a, b = E[word_id], E[other]
            sims[other] = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
        want = sorted(sims, key=lambda i: (-sims[i], i))[:5]
        assert [i for i, _ in got] == want
        assert word_id not in [i for i, _ in got]


def test_duplicate_embedding_row_has_similarity_one():
    _, params, vocab = make_case(1)
    params.E[NUM_SPECIAL + 1] = params.E[NUM_SPECIAL]
    got = nearest_neighbors(NUM_SPECIAL, params, m=3)
    assert got[0] == (NUM_SPECIAL + 1, 1.0)


def test_neighbors_reject_special_query():
    _, params, _ = make_case(2)
    with pytest.raises(InvalidParam):
        nearest_neighbors(UNK_ID, params, m=3)


# --- hotflip ---------------------------------------------------------------

def test_hotflip_budget_and_edit_shape():
    inp, params, vocab = make_case(3)
    with pytest.raises(InvalidParam):
        hotflip(inp, params, vocab, budget=0)
    res = hotflip(inp, params, vocab, budget=1, m=4)
    assert len(res.edits) <= 1
    for e in res.edits:
        assert e.kind == "replace"
        assert inp.tokens[e.positions[0]].segment == "question"


@pytest.mark.parametrize("seed", range(5))
def test_hotflip_each_step_is_optimal_among_candidates(seed):
    inp, params, vocab = make_case(seed + 30)
    m = 6
    res = hotflip(inp, params, vocab, budget=3, m=m)
    base = forward(inp, params)
    committed = []
    for e in res.edits:
        p = e.positions[0]
        fs = {}
        for cand_id, _ in nearest_neighbors(inp.tokens[p].id, params, m):
            trial = apply_edits(
                inp, committed + [Edit("replace", (p,), e.original,
                                       vocab.surface(cand_id))], vocab)
            fs[vocab.surface(cand_id)] = forward(trial, params, target=base.target).F
        assert fs[e.replacement] == min(fs.values())
        committed.append(e)


def test_hotflip_success_means_answer_changed():
    for seed in range(8):
        inp, params, vocab = make_case(seed + 50)
        res = hotflip(inp, params, vocab, budget=3, m=8)
        if res.success:
            assert res.new_prediction.answer != res.original_prediction.answer
        else:
            assert res.new_prediction.answer == res.original_prediction.answer
        assert apply_edits(inp, res.edits, vocab) == res.modified_input


# --- input reduction -------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_input_reduction_preserves_answer_and_is_minimal(seed):
    inp, params, vocab = make_case(seed + 70)
    res = input_reduction(inp, params, vocab)
    assert res.new_prediction.answer == res.original_prediction.answer
    assert apply_edits(inp, res.edits, vocab) == res.modified_input
    # one-step minimality: deleting the lowest-saliency remaining word
    # changes the answer, unless only one word is left
    remaining = res.modified_input.question_positions
    if len(remaining) > 1:
        smap = compute_saliency("integrated_grad", res.modified_input, params)
        lowest = min(range(len(remaining)),
                     key=lambda i: (smap.scores[remaining[i]], i))
        words = [res.modified_input.surfaces[p] for p in remaining]
        del words[lowest]
        ctx = [res.modified_input.surfaces[p]
               for p in res.modified_input.context_positions]
        from qaprobe.tokenizer import rebuild
        shorter = rebuild(words, ctx, None, vocab)
        assert forward(shorter, params).prediction.answer != res.original_prediction.answer
    if res.success:
        assert len(res.modified_input.question_positions) < len(inp.question_positions)
    else:
        assert res.modified_input == inp


def test_input_reduction_beam_matches_or_beats_greedy():
    for seed in range(4):
        inp, params, vocab = make_case(seed + 90)
        greedy = input_reduction(inp, params, vocab, beam_width=1)
        beam = input_reduction(inp, params, vocab, beam_width=3)
        assert len(beam.modified_input.question_positions) <= \
            len(greedy.modified_input.question_positions)
        assert beam.new_prediction.answer == beam.original_prediction.answer


def test_input_reduction_needs_two_words(small_vocab):
    params = init_params(len(small_vocab), d=16, heads=2, dff=16, seed=0)
    inp = tokenize("sky", "the sky is blue", None, small_vocab)
    with pytest.raises(InvalidParam):
        input_reduction(inp, params, small_vocab)


# --- sub-span and top-k ----------------------------------------------------

def brute_force_window(scores, L):
    sums = []
    for s in range(len(scores) - L + 1):
        total = 0.0
        for x in scores[s:s + L]:
            total += x
        sums.append(total)
    best = max(range(len(sums)), key=lambda s: sums[s])
    for s in range(len(sums)):  # leftmost max
        if sums[s] == sums[best]:
            return s
    return best


@pytest.mark.parametrize("seed", range(8))
def test_sub_span_matches_brute_force_window(seed):
    inp, params, vocab = make_case(seed + 110)
    L = 4
    res = sub_span(inp, params, vocab, window=L)
    smap = res.saliency_basis
    ctx = inp.context_positions
    start = brute_force_window([smap.scores[p] for p in ctx], L)
    assert res.edits[0].positions == tuple(ctx[start:start + L])
    assert len(res.modified_input.context_positions) == L
    assert apply_edits(inp, res.edits, vocab) == res.modified_input


def test_sub_span_full_window_keeps_context(small_vocab):
    params = init_params(len(small_vocab), d=16, heads=2, dff=16, seed=1)
    inp = tokenize("what?", "the sky is blue", None, small_vocab)
    res = sub_span(inp, params, small_vocab, window=4)
    assert res.modified_input.context_text == inp.context_text
    with pytest.raises(InvalidParam):
        sub_span(inp, params, small_vocab, window=5)
    with pytest.raises(InvalidParam):
        sub_span(inp, params, small_vocab, window=0)


@pytest.mark.parametrize("seed", range(8))
def test_top_k_matches_brute_force_sort(seed):
    inp, params, vocab = make_case(seed + 130)
    k = 3
    res = top_k(inp, params, vocab, k=k)
    smap = res.saliency_basis
    ctx = inp.context_positions
    want = sorted(sorted(ctx, key=lambda p: (-smap.scores[p], p))[:k])
    assert res.edits[0].positions == tuple(want)
    kept_words = [inp.surfaces[p] for p in want]
    assert list(res.modified_input.surfaces[p]
                for p in res.modified_input.context_positions) == kept_words


def test_top_k_full_k_is_identity(small_vocab):
    params = init_params(len(small_vocab), d=16, heads=2, dff=16, seed=2)
    inp = tokenize("what?", "the sky is blue today", None, small_vocab)
    res = top_k(inp, params, small_vocab, k=5)
    assert res.modified_input.context_text == inp.context_text
    one = top_k(inp, params, small_vocab, k=1)
    assert len(one.modified_input.context_positions) == 1


def test_dispatcher_validates_method_and_options():
    inp, params, vocab = make_case(150)
    res = run_attack("top_k", inp, params, vocab, options={"k": 2})
    assert res.method == "top_k"
    with pytest.raises(InvalidParam):
        run_attack("paraphrase", inp, params, vocab)
    with pytest.raises(InvalidParam):
        run_attack("sub_span", inp, params, vocab, options={"k": 2})
