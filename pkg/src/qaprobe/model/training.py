"""Cross-entropy training of the span model with plain gradient descent."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidLabel, InvalidParam
from ..tokenizer import TokenizedInput, tokenize
from ..vocab import Vocabulary
from .network import (
    ATTN_TEMPERATURE,
    ForwardRecord,
    _normalize_backward,
    _normalize_rows,
    _sigmoid,
    _softplus,
    forward,
)
from .params import ModelParams, init_params
from .synthetic import QAExample

logger = logging.getLogger(__name__)

# Spreading this much target mass over the non-gold positions caps logit
# growth on the separable templated corpus; unbounded logits make the
# model needlessly brittle and its gradient paths violently curved.
LABEL_SMOOTHING = 0.1


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.05
    batch_size: int = 32
    seed: int = 0
    dev_count: int = 0   # held out from the tail of the dataset
    d: int = 64
    heads: int = 4
    dff: int = 128
    max_len: int = 128
    log_every: int = 0   # epochs between progress lines; 0 silences


@dataclass
class TrainReport:
    dev_exact_match: float
    train_items: int
    dev_items: int
    epochs: int
    final_loss: float
    history: list[float] = field(default_factory=list)


@dataclass
class _Labeled:
    inp: TokenizedInput
    start: int  # absolute token positions of the gold span
    end: int


def _prepare(examples: list[QAExample], vocab: Vocabulary) -> list[_Labeled]:
    prepared = []
    for ex in examples:
        inp = tokenize(ex.question, ex.context, None, vocab)
        ctx = inp.context_positions
        if not (0 <= ex.answer_start <= ex.answer_end < len(ctx)):
            raise InvalidLabel(
                f"answer span ({ex.answer_start}, {ex.answer_end}) outside context"
                f" of {len(ctx)} tokens"
            )
        prepared.append(_Labeled(inp, ctx[ex.answer_start], ctx[ex.answer_end]))
    return prepared


def _loss_and_param_grads(item: _Labeled, params: ModelParams,
                          grads: dict[str, np.ndarray]) -> float:
    """Accumulate d(loss)/d(params) into ``grads``; returns the loss.

    Loss is cross-entropy of the start position plus cross-entropy of the
    end position, each over the context segment, against lightly smoothed
    gold targets.
    """
    fr = forward(item.inp, params)
    n, d = fr.X.shape
    h, dh = params.heads, params.head_dim
    ctx = list(item.inp.context_positions)

    loss = 0.0
    dH2 = np.zeros((n, d))
    for logits, vec_name, gold in (
        (fr.start_logits, "w_start", item.start),
        (fr.end_logits, "w_end", item.end),
    ):
        ctx_logits = logits[ctx]
        shifted = ctx_logits - ctx_logits.max()
        probs = np.exp(shifted) / np.exp(shifted).sum()
        target = np.full(len(ctx), LABEL_SMOOTHING / len(ctx))
        target[ctx.index(gold)] += 1.0 - LABEL_SMOOTHING
        loss -= float(target @ np.log(probs + 1e-300))
        dlogits = probs - target
        vec = getattr(params, vec_name)
        dH2[ctx] += np.outer(dlogits, vec)
        grads[vec_name] += fr.H2[ctx].T @ dlogits

    # Feed-forward block.
    R = _softplus(fr.G)
    dFF = dH2
    grads["W2"] += R.T @ dFF
    grads["b2"] += dFF.sum(axis=0)
    dR = dFF @ params.W2.T
    dG = dR * _sigmoid(fr.G)
    grads["W1"] += fr.H1.T @ dG
    grads["b1"] += dG.sum(axis=0)
    dH1 = dH2 + dG @ params.W1.T

    # Attention block.
    dC = dH1 @ params.Wo.T
    grads["Wo"] += fr.C.T @ dH1
    dCh = dC.reshape(n, h, dh).transpose(1, 0, 2)
    dA = np.einsum("hne,hme->hnm", dCh, fr.V)
    dV = np.einsum("hnm,hne->hme", fr.A, dCh)
    dS = fr.A * (dA - (fr.A * dA).sum(axis=-1, keepdims=True))
    Qh, Qn = _normalize_rows(fr.Q)
    Kh, Kn = _normalize_rows(fr.K)
    dQ = _normalize_backward(
        ATTN_TEMPERATURE * np.einsum("hnm,hme->hne", dS, Kh), Qh, Qn)
    dK = _normalize_backward(
        ATTN_TEMPERATURE * np.einsum("hnm,hne->hme", dS, Qh), Kh, Kn)
    grads["Wq"] += np.einsum("nd,hne->hde", fr.X, dQ)
    grads["Wk"] += np.einsum("nd,hne->hde", fr.X, dK)
    grads["Wv"] += np.einsum("nd,hne->hde", fr.X, dV)

    dX = dH1.copy()
    dX += np.einsum("hne,hde->nd", dQ, params.Wq)
    dX += np.einsum("hne,hde->nd", dK, params.Wk)
    dX += np.einsum("hne,hde->nd", dV, params.Wv)

    ids = np.asarray(item.inp.ids, dtype=np.intp)
    np.add.at(grads["E"], ids, dX)
    grads["P"][:n] += dX
    return loss


def exact_match(params: ModelParams, examples: list[QAExample],
                vocab: Vocabulary) -> float:
    """Fraction of items whose predicted answer string equals the gold one."""
    if not examples:
        return 0.0
    hits = 0
    for ex in examples:
        fr = forward(tokenize(ex.question, ex.context, None, vocab), params)
        if fr.prediction.answer == ex.answer_text:
            hits += 1
    return hits / len(examples)


def train(
    examples: list[QAExample],
    vocab: Vocabulary,
    config: Optional[TrainConfig] = None,
) -> tuple[ModelParams, TrainReport]:
    """Plain gradient descent; deterministic for a given config seed."""
    config = config or TrainConfig()
    if not examples:
        raise InvalidParam("dataset must be non-empty")
    if config.dev_count >= len(examples):
        raise InvalidParam("dev_count must leave at least one training item")

    split = len(examples) - config.dev_count
    train_examples, dev_examples = examples[:split], examples[split:]
    items = _prepare(train_examples, vocab)
    _prepare(dev_examples, vocab)  # label validation only

    params = init_params(
        len(vocab), d=config.d, heads=config.heads, dff=config.dff,
        max_len=config.max_len, seed=config.seed,
    )
    rng = np.random.default_rng(config.seed + 1)
    history: list[float] = []
    mean_loss = float("nan")

    for epoch in range(config.epochs):
        order = rng.permutation(len(items))
        total_loss = 0.0
        for lo in range(0, len(items), config.batch_size):
            batch = [items[i] for i in order[lo : lo + config.batch_size]]
            grads = {name: np.zeros_like(arr) for name, arr in params.arrays().items()}
            for item in batch:
                total_loss += _loss_and_param_grads(item, params, grads)
            step = config.learning_rate / len(batch)
            for name, grad in grads.items():
                getattr(params, name)[...] -= step * grad
        mean_loss = total_loss / len(items)
        history.append(mean_loss)
        if config.log_every and (epoch + 1) % config.log_every == 0:
            logger.info("epoch %d/%d loss %.4f", epoch + 1, config.epochs, mean_loss)

    dev_em = exact_match(params, dev_examples, vocab) if dev_examples else 0.0
    report = TrainReport(
        dev_exact_match=dev_em,
        train_items=len(train_examples),
        dev_items=len(dev_examples),
        epochs=config.epochs,
        final_loss=mean_loss,
        history=history,
    )
    return params, report
