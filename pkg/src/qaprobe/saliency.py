"""Token-level saliency maps over the QA model.

Five methods, one record type. Every map is aligned 1:1 with the token
positions of the input it explains, and every method fixes the explained
target (the argmax prediction unless a target is passed) before touching
the embeddings, so perturbed forward passes score the same span or
candidate throughout.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidMap, InvalidParam
from .model import (
    backward_to_attention,
    backward_to_embeddings,
    forward,
    forward_from_embeddings,
)
from .tokenizer import TokenizedInput

VANILLA_GRAD = "vanilla_grad"
INTEGRATED_GRAD = "integrated_grad"
SMOOTHGRAD = "smoothgrad"
ATTENTION = "attention"
SCALED_ATTENTION = "scaled_attention"
METHODS = (VANILLA_GRAD, INTEGRATED_GRAD, SMOOTHGRAD, ATTENTION, SCALED_ATTENTION)

SUM_TO_ONE = "sum_to_one"
MAX_ONE = "max_one"
RAW = "raw"
NORMALIZATIONS = (SUM_TO_ONE, MAX_ONE, RAW)

DEFAULT_IG_STEPS = 50
DEFAULT_SG_SAMPLES = 25
DEFAULT_SG_SEED = 0
# noise scale defaults to this fraction of the input's embedding value range
SG_NOISE_FRACTION = 0.15


@dataclass(frozen=True)
class SaliencyMap:
    """Per-token importance scores.

    ``raw`` keeps the signed pre-normalization attributions; ``scores``
    are always derived from |raw| under the recorded normalization, so
    re-normalizing is loss-free.
    """

    method: str
    scores: tuple[float, ...]
    tokens: tuple[str, ...]
    normalization: str
    params_used: dict
    raw: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.scores)


def normalize(smap: SaliencyMap, mode: str = SUM_TO_ONE) -> SaliencyMap:
    """Re-derive ``scores`` from |raw| under ``mode``.

    All-zero maps come back unchanged with the mode recorded as raw, so
    downstream consumers never divide by zero.
    """
    if mode not in NORMALIZATIONS:
        raise InvalidParam(f"unknown normalization mode {mode!r}")
    base = np.abs(np.asarray(smap.raw, dtype=float))
    if not np.all(np.isfinite(base)):
        raise InvalidMap("saliency scores must be finite")
    if mode == RAW or not np.any(base > 0.0):
        return dataclasses.replace(
            smap, scores=tuple(base.tolist()), normalization=RAW)
    denom = base.sum() if mode == SUM_TO_ONE else base.max()
    return dataclasses.replace(
        smap, scores=tuple((base / denom).tolist()), normalization=mode)


def _finish(method: str, raw: np.ndarray, inp: TokenizedInput,
            params_used: dict) -> SaliencyMap:
    raw = np.asarray(raw, dtype=float)
    smap = SaliencyMap(
        method=method,
        scores=tuple(np.abs(raw).tolist()),
        tokens=tuple(inp.surfaces),
        normalization=RAW,
        params_used=dict(params_used),
        raw=tuple(raw.tolist()),
    )
    return normalize(smap, SUM_TO_ONE)


def vanilla_gradient(inp: TokenizedInput, params, target=None) -> SaliencyMap:
    """L2 norm over embedding dims of dF/dX per token."""
    fr = forward(inp, params, target=target)
    grad = backward_to_embeddings(fr, params)
    return _finish(VANILLA_GRAD, np.linalg.norm(grad.dX, axis=1), inp, {})


def integrated_gradients(inp: TokenizedInput, params, steps: int = DEFAULT_IG_STEPS,
                         target=None) -> SaliencyMap:
    """Right Riemann sum of gradients along the zero-baseline path.

    attribution_i = sum_dims x_i * (1/m) * sum_{t=1..m} dF(t/m * X)/dx_i
    """
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise InvalidParam("steps must be a positive integer")
    fr = forward(inp, params, target=target)
    X = fr.X
    total = np.zeros_like(X)
    for t in range(1, steps + 1):
        frt = forward_from_embeddings(X * (t / steps), inp, params, fr.target)
        total += backward_to_embeddings(frt, params).dX
    attributions = (X * (total / steps)).sum(axis=1)
    return _finish(INTEGRATED_GRAD, attributions, inp, {"steps": steps})


def smoothgrad(inp: TokenizedInput, params, samples: int = DEFAULT_SG_SAMPLES,
               noise_scale: Optional[float] = None, seed: int = DEFAULT_SG_SEED,
               target=None) -> SaliencyMap:
    """Average vanilla-gradient scores over Gaussian-perturbed embeddings.

    Averaging happens on the raw per-token norms, before any
    normalization. noise_scale=None picks 0.15 * (max - min) of X.
    """
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
        raise InvalidParam("samples must be a positive integer")
    fr = forward(inp, params, target=target)
    X = fr.X
    if noise_scale is None:
        noise_scale = SG_NOISE_FRACTION * float(X.max() - X.min())
    noise_scale = float(noise_scale)
    if not np.isfinite(noise_scale) or noise_scale < 0.0:
        raise InvalidParam("noise scale must be a finite non-negative number")
    rng = np.random.default_rng(seed)
    acc = np.zeros(X.shape[0])
    for _ in range(samples):
        Xj = X if noise_scale == 0.0 else X + rng.normal(0.0, noise_scale, X.shape)
        frj = forward_from_embeddings(Xj, inp, params, fr.target)
        acc += np.linalg.norm(backward_to_embeddings(frj, params).dX, axis=1)
    used = {"samples": samples, "noise_scale": noise_scale, "seed": int(seed)}
    return _finish(SMOOTHGRAD, acc / samples, inp, used)


def attention_saliency(inp: TokenizedInput, params, target=None) -> SaliencyMap:
    """Mean over heads of the CLS attention row; CLS itself masked to 0."""
    fr = forward(inp, params, target=target)
    raw = fr.A[:, 0, :].mean(axis=0)
    raw[0] = 0.0
    return _finish(ATTENTION, raw, inp, {})


def scaled_attention(inp: TokenizedInput, params, target=None,
                     attention_gradient: Optional[np.ndarray] = None) -> SaliencyMap:
    """CLS-row attention weights scaled by dF/dA, averaged over heads.

    ``attention_gradient`` substitutes the analytic dF/dA tensor; tests
    inject all-ones to recover plain attention saliency.
    """
    fr = forward(inp, params, target=target)
    if attention_gradient is None:
        dA = backward_to_attention(fr, params).dA
    else:
        dA = np.asarray(attention_gradient, dtype=float)
        if dA.shape != fr.A.shape:
            raise InvalidParam(
                f"attention gradient shape {dA.shape} != {fr.A.shape}")
    raw = (fr.A[:, 0, :] * dA[:, 0, :]).mean(axis=0)
    raw[0] = 0.0
    return _finish(SCALED_ATTENTION, raw, inp, {})


_OPTION_KEYS = {
    VANILLA_GRAD: (),
    INTEGRATED_GRAD: ("steps",),
    SMOOTHGRAD: ("samples", "noise_scale", "seed"),
    ATTENTION: (),
    SCALED_ATTENTION: (),
}


def compute_saliency(method: str, inp: TokenizedInput, params, target=None,
                     options: Optional[dict] = None) -> SaliencyMap:
    """Dispatch by method name; unknown methods and stray options are rejected."""
    if method not in METHODS:
        raise InvalidParam(f"unknown saliency method {method!r}")
    opts = dict(options or {})
    stray = set(opts) - set(_OPTION_KEYS[method])
    if stray:
        raise InvalidParam(
            f"unsupported options for {method}: {sorted(stray)}")
    if method == VANILLA_GRAD:
        return vanilla_gradient(inp, params, target=target)
    if method == INTEGRATED_GRAD:
        return integrated_gradients(
            inp, params, steps=opts.get("steps", DEFAULT_IG_STEPS), target=target)
    if method == SMOOTHGRAD:
        return smoothgrad(
            inp, params,
            samples=opts.get("samples", DEFAULT_SG_SAMPLES),
            noise_scale=opts.get("noise_scale"),
            seed=opts.get("seed", DEFAULT_SG_SEED),
            target=target)
    if method == ATTENTION:
        return attention_saliency(inp, params, target=target)
    return scaled_attention(inp, params, target=target)
