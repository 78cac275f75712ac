"""Forward pass, span/candidate scoring, and exact reverse-mode gradients.

The network is: embedding lookup + learned position embeddings ->
one multi-head self-attention layer -> position-wise feed-forward
(both with residual connections) -> linear scoring heads. Everything
is float64 numpy; the backward pass is written by hand so gradients
with respect to the input embeddings and the post-softmax attention
tensor are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..errors import InputTooLong, InvalidTarget
from ..tokenizer import KIND_EXTRACTIVE, TokenizedInput
from .params import ModelParams

# Spans longer than this are not enumerated as prediction candidates.
MAX_SPAN_LEN = 10


@dataclass(frozen=True)
class SpanTarget:
    """Scalar target F = start_logit[start] + end_logit[end]."""
    start: int
    end: int


@dataclass(frozen=True)
class CandidateTarget:
    """Scalar target F = candidate_logits[index]."""
    index: int


Target = Union[SpanTarget, CandidateTarget]


@dataclass(frozen=True)
class Prediction:
    answer: str
    span: Optional[tuple[int, int]]  # absolute token positions
    candidate_index: Optional[int]
    probability: float
    score: float


@dataclass
class ForwardRecord:
    """All forward activations needed for prediction and backprop."""

    input: TokenizedInput
    X: np.ndarray            # (n, d) embeddings fed to the attention layer
    Q: np.ndarray            # (h, n, dh)
    K: np.ndarray
    V: np.ndarray
    A: np.ndarray            # (h, n, n) post-softmax attention
    C: np.ndarray            # (n, d) concatenated head outputs
    O: np.ndarray            # (n, d) attention output projection
    H1: np.ndarray           # (n, d) X + O
    G: np.ndarray            # (n, dff) pre-activation feed-forward
    H2: np.ndarray           # (n, d) H1 + ffn
    start_logits: np.ndarray  # (n,)
    end_logits: np.ndarray    # (n,)
    candidate_logits: Optional[np.ndarray]  # (num_candidates,)
    target: Target
    F: float
    prediction: Prediction

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass
class GradientRecord:
    dX: np.ndarray           # (n, d) dF/dX
    dA: np.ndarray           # (h, n, n) dF/dA with A treated as a leaf
    target: Target


def _softmax_rows(S: np.ndarray) -> np.ndarray:
    shifted = S - S.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


# Attention logits are temperature-scaled cosine similarities. Cosine
# routing is invariant to rescaling the embeddings, so along the
# baseline path t*X (t in (0, 1]) the attention pattern is constant and
# the attended value stream stays linear in t; dot-product logits would
# instead sweep softmax saturation across the path and wreck low-order
# quadrature of path-integral attributions.
ATTN_TEMPERATURE = 12.0
NORM_EPS = 1e-12


def _normalize_rows(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.maximum(np.linalg.norm(M, axis=-1, keepdims=True), NORM_EPS)
    return M / norms, norms


def _normalize_backward(dMh: np.ndarray, Mh: np.ndarray,
                        norms: np.ndarray) -> np.ndarray:
    return (dMh - (dMh * Mh).sum(axis=-1, keepdims=True) * Mh) / norms


# The feed-forward activation must be smooth: path-integral attributions
# sample gradients along t*X for t in (0, 1], and kinked activations put
# derivative jumps on that path that low-order quadrature cannot absorb.
def _softplus(G: np.ndarray) -> np.ndarray:
    return np.maximum(G, 0.0) + np.log1p(np.exp(-np.abs(G)))


def _sigmoid(G: np.ndarray) -> np.ndarray:
    out = np.empty_like(G)
    pos = G >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-G[pos]))
    e = np.exp(G[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def embed(inp: TokenizedInput, params: ModelParams) -> np.ndarray:
    """Embedding-layer output: token rows plus position rows (n, d)."""
    n = len(inp)
    if n > params.max_len:
        raise InputTooLong(f"sequence length {n} exceeds max length {params.max_len}")
    ids = np.asarray(inp.ids, dtype=np.intp)
    return params.E[ids] + params.P[:n]


def _enumerate_spans(inp: TokenizedInput) -> list[tuple[int, int]]:
    ctx = inp.context_positions
    spans = []
    for a, i in enumerate(ctx):
        for j in ctx[a : a + MAX_SPAN_LEN]:
            spans.append((i, j))
    return spans


def _span_predictions(inp: TokenizedInput, start_logits: np.ndarray,
                      end_logits: np.ndarray) -> list[Prediction]:
    """All enumerable spans scored and softmax-normalized, best first."""
    spans = _enumerate_spans(inp)
    scores = np.array([start_logits[i] + end_logits[j] for i, j in spans])
    shifted = scores - scores.max()
    probs = np.exp(shifted) / np.exp(shifted).sum()
    order = sorted(range(len(spans)), key=lambda k: (-scores[k], spans[k]))
    return [
        Prediction(
            answer=inp.span_text(*spans[k]),
            span=spans[k],
            candidate_index=None,
            probability=float(probs[k]),
            score=float(scores[k]),
        )
        for k in order
    ]


def _candidate_predictions(inp: TokenizedInput, logits: np.ndarray) -> list[Prediction]:
    shifted = logits - logits.max()
    probs = np.exp(shifted) / np.exp(shifted).sum()
    order = sorted(range(len(logits)), key=lambda c: (-logits[c], c))
    return [
        Prediction(
            answer=" ".join(inp.tokens[p].surface for p in inp.candidate_positions(c)),
            span=None,
            candidate_index=c,
            probability=float(probs[c]),
            score=float(logits[c]),
        )
        for c in order
    ]


def forward_from_embeddings(X: np.ndarray, inp: TokenizedInput,
                            params: ModelParams,
                            target: Optional[Target] = None) -> ForwardRecord:
    """Run the network on explicit embeddings (saliency paths feed scaled
    or perturbed X through here). ``target`` fixes the scalar F; by
    default it is the argmax prediction of this forward pass."""
    n, d = X.shape
    h, dh = params.heads, params.head_dim

    # Attention per head: S = tau * cos(q_n, k_m), A = softmax rows, C = AV.
    Q = np.einsum("nd,hde->hne", X, params.Wq)
    K = np.einsum("nd,hde->hne", X, params.Wk)
    V = np.einsum("nd,hde->hne", X, params.Wv)
    Qh, _ = _normalize_rows(Q)
    Kh, _ = _normalize_rows(K)
    S = ATTN_TEMPERATURE * np.einsum("hne,hme->hnm", Qh, Kh)
    A = _softmax_rows(S)
    Ch = np.einsum("hnm,hme->hne", A, V)
    C = Ch.transpose(1, 0, 2).reshape(n, d)
    O = C @ params.Wo
    H1 = X + O

    G = H1 @ params.W1 + params.b1
    R = _softplus(G)
    H2 = H1 + R @ params.W2 + params.b2

    start_logits = H2 @ params.w_start
    end_logits = H2 @ params.w_end

    candidate_logits = None
    if inp.kind == KIND_EXTRACTIVE:
        ranked = _span_predictions(inp, start_logits, end_logits)
    else:
        pooled = [H2[list(inp.candidate_positions(c))].mean(axis=0)
                  for c in range(inp.num_candidates)]
        candidate_logits = np.array([p @ params.w_cand for p in pooled])
        ranked = _candidate_predictions(inp, candidate_logits)

    prediction = ranked[0]
    if target is None:
        if prediction.span is not None:
            target = SpanTarget(*prediction.span)
        else:
            assert prediction.candidate_index is not None
            target = CandidateTarget(prediction.candidate_index)

    record = ForwardRecord(
        input=inp, X=X, Q=Q, K=K, V=V, A=A, C=C, O=O, H1=H1, G=G, H2=H2,
        start_logits=start_logits, end_logits=end_logits,
        candidate_logits=candidate_logits, target=target, F=0.0,
        prediction=prediction,
    )
    record.F = score_target(record, target)
    return record


def forward(inp: TokenizedInput, params: ModelParams,
            target: Optional[Target] = None) -> ForwardRecord:
    return forward_from_embeddings(embed(inp, params), inp, params, target)


def top_predictions(fr: ForwardRecord, limit: int = 3) -> list[Prediction]:
    if fr.input.kind == KIND_EXTRACTIVE:
        ranked = _span_predictions(fr.input, fr.start_logits, fr.end_logits)
        return ranked[:limit]
    assert fr.candidate_logits is not None
    return _candidate_predictions(fr.input, fr.candidate_logits)


def _validate_target(fr: ForwardRecord, target: Target) -> None:
    if isinstance(target, SpanTarget):
        ctx = set(fr.input.context_positions)
        if target.start not in ctx or target.end not in ctx or target.start > target.end:
            raise InvalidTarget(f"span {target} is not a context span of this input")
    elif isinstance(target, CandidateTarget):
        if fr.candidate_logits is None or not (0 <= target.index < len(fr.candidate_logits)):
            raise InvalidTarget(f"candidate {target} does not exist in this record")
    else:
        raise InvalidTarget(f"unknown target {target!r}")


def score_target(fr: ForwardRecord, target: Target) -> float:
    """The scalar F the gradients are taken against: the pre-softmax
    logit(s) of the chosen span or candidate."""
    _validate_target(fr, target)
    if isinstance(target, SpanTarget):
        return float(fr.start_logits[target.start] + fr.end_logits[target.end])
    return float(fr.candidate_logits[target.index])


def _grad_H2(fr: ForwardRecord, params: ModelParams, target: Target) -> np.ndarray:
    n, d = fr.X.shape
    dH2 = np.zeros((n, d))
    if isinstance(target, SpanTarget):
        dH2[target.start] += params.w_start
        dH2[target.end] += params.w_end
    else:
        positions = list(fr.input.candidate_positions(target.index))
        dH2[positions] += params.w_cand / len(positions)
    return dH2


def _backward(fr: ForwardRecord, params: ModelParams,
              target: Target) -> tuple[np.ndarray, np.ndarray]:
    """Reverse-mode pass from the scalar F down to (dF/dX, dF/dA)."""
    h, dh = params.heads, params.head_dim
    n, d = fr.X.shape

    dH2 = _grad_H2(fr, params, target)

    # Feed-forward with residual: H2 = H1 + softplus(H1 W1 + b1) W2 + b2.
    dR = dH2 @ params.W2.T
    dG = dR * _sigmoid(fr.G)
    dH1 = dH2 + dG @ params.W1.T

    # Output projection: H1 = X + C Wo.
    dC = dH1 @ params.Wo.T
    dCh = dC.reshape(n, h, dh).transpose(1, 0, 2)

    # dF/dA with post-softmax A treated as a leaf: dA = dCh V^T.
    dA = np.einsum("hne,hme->hnm", dCh, fr.V)
    dV = np.einsum("hnm,hne->hme", fr.A, dCh)

    # Softmax backprop: dS = A * (dA - rowsum(A*dA)), then through the
    # cosine: S = tau * Qh Kh^T with Qh, Kh the row-normalized Q, K.
    dS = fr.A * (dA - (fr.A * dA).sum(axis=-1, keepdims=True))
    Qh, Qn = _normalize_rows(fr.Q)
    Kh, Kn = _normalize_rows(fr.K)
    dQh = ATTN_TEMPERATURE * np.einsum("hnm,hme->hne", dS, Kh)
    dKh = ATTN_TEMPERATURE * np.einsum("hnm,hne->hme", dS, Qh)
    dQ = _normalize_backward(dQh, Qh, Qn)
    dK = _normalize_backward(dKh, Kh, Kn)

    dX = dH1.copy()
    dX += np.einsum("hne,hde->nd", dQ, params.Wq)
    dX += np.einsum("hne,hde->nd", dK, params.Wk)
    dX += np.einsum("hne,hde->nd", dV, params.Wv)
    return dX, dA


def backward_to_embeddings(fr: ForwardRecord, params: ModelParams,
                           target: Optional[Target] = None) -> GradientRecord:
    """Exact dF/dX for the record's target (or an explicit one)."""
    target = fr.target if target is None else target
    _validate_target(fr, target)
    dX, dA = _backward(fr, params, target)
    return GradientRecord(dX=dX, dA=dA, target=target)


def backward_to_attention(fr: ForwardRecord, params: ModelParams,
                          target: Optional[Target] = None) -> GradientRecord:
    """dF/dA treating the post-softmax attention tensor as the leaf."""
    return backward_to_embeddings(fr, params, target)


def forward_from_attention(fr: ForwardRecord, A: np.ndarray,
                           params: ModelParams,
                           target: Optional[Target] = None) -> float:
    """Re-run everything downstream of the attention tensor and return F.

    Used by finite-difference checks of dF/dA: upstream activations
    (X, V) are taken from the record, only A is replaced.
    """
    n, d = fr.X.shape
    h, dh = params.heads, params.head_dim
    Ch = np.einsum("hnm,hme->hne", A, fr.V)
    C = Ch.transpose(1, 0, 2).reshape(n, d)
    H1 = fr.X + C @ params.Wo
    G = H1 @ params.W1 + params.b1
    H2 = H1 + _softplus(G) @ params.W2 + params.b2
    target = fr.target if target is None else target
    if isinstance(target, SpanTarget):
        return float(H2[target.start] @ params.w_start + H2[target.end] @ params.w_end)
    pooled = H2[list(fr.input.candidate_positions(target.index))].mean(axis=0)
    return float(pooled @ params.w_cand)
