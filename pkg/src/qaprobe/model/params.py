"""Model parameters: initialization and versioned (de)serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Tuple

import numpy as np

from ..errors import InvalidDocument
from ..vocab import Vocabulary

PARAMS_FORMAT_VERSION = 1

# Array fields in fixed serialization order.
ARRAY_FIELDS = (
    "E", "P", "Wq", "Wk", "Wv", "Wo", "W1", "b1", "W2", "b2",
    "w_start", "w_end", "w_cand",
)


@dataclass
class ModelParams:
    """Weights of the one-layer attention QA model.

    Shapes: E (V,d), P (max_len,d), Wq/Wk/Wv (heads,d,d/heads),
    Wo (d,d), W1 (d,dff), b1 (dff,), W2 (dff,d), b2 (d,),
    w_start/w_end/w_cand (d,).
    """

    d: int
    heads: int
    dff: int
    max_len: int
    seed: int
    E: np.ndarray
    P: np.ndarray
    Wq: np.ndarray
    Wk: np.ndarray
    Wv: np.ndarray
    Wo: np.ndarray
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    w_start: np.ndarray
    w_end: np.ndarray
    w_cand: np.ndarray

    @property
    def head_dim(self) -> int:
        return self.d // self.heads

    @property
    def vocab_size(self) -> int:
        return self.E.shape[0]

    def copy(self) -> "ModelParams":
        kwargs = {}
        for f in fields(self):
            value = getattr(self, f.name)
            kwargs[f.name] = value.copy() if isinstance(value, np.ndarray) else value
        return ModelParams(**kwargs)

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in ARRAY_FIELDS}


def init_params(
    vocab_size: int,
    d: int = 64,
    heads: int = 4,
    dff: int = 128,
    max_len: int = 128,
    seed: int = 0,
    emb_scale: float = 0.3,
    weight_scale: float = 0.15,
) -> ModelParams:
    """Gaussian initialization; deterministic for a given seed."""
    if d % heads != 0:
        raise ValueError("d must be divisible by heads")
    rng = np.random.default_rng(seed)
    dh = d // heads

    def w(*shape: int, scale: float) -> np.ndarray:
        return rng.normal(0.0, scale, size=shape)

    return ModelParams(
        d=d, heads=heads, dff=dff, max_len=max_len, seed=seed,
        E=w(vocab_size, d, scale=emb_scale),
        P=w(max_len, d, scale=emb_scale * 0.5),
        Wq=w(heads, d, dh, scale=weight_scale),
        Wk=w(heads, d, dh, scale=weight_scale),
        Wv=w(heads, d, dh, scale=weight_scale),
        Wo=w(d, d, scale=weight_scale),
        W1=w(d, dff, scale=weight_scale),
        b1=np.zeros(dff),
        W2=w(dff, d, scale=weight_scale),
        b2=np.zeros(d),
        w_start=w(d, scale=weight_scale),
        w_end=w(d, scale=weight_scale),
        w_cand=w(d, scale=weight_scale),
    )


def save_params(path: str, params: ModelParams, vocab: Vocabulary) -> None:
    """Versioned JSON with fixed field order; floats survive round-trip exactly."""
    doc = {
        "format_version": PARAMS_FORMAT_VERSION,
        "d": params.d,
        "heads": params.heads,
        "dff": params.dff,
        "max_len": params.max_len,
        "seed": params.seed,
        "vocab": [[s, i] for s, i in vocab.entries()],
        "arrays": {
            name: {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
            for name, arr in params.arrays().items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_params(path: str) -> Tuple[ModelParams, Vocabulary]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidDocument(f"cannot read params file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != PARAMS_FORMAT_VERSION:
        raise InvalidDocument(
            f"unsupported params format version {doc.get('format_version')!r};"
            f" expected {PARAMS_FORMAT_VERSION}"
        )
    try:
        vocab = Vocabulary.from_entries([(s, i) for s, i in doc["vocab"]])
        arrays = {}
        for name in ARRAY_FIELDS:
            spec = doc["arrays"][name]
            arrays[name] = np.asarray(spec["data"], dtype=np.float64).reshape(spec["shape"])
        params = ModelParams(
            d=doc["d"], heads=doc["heads"], dff=doc["dff"],
            max_len=doc["max_len"], seed=doc["seed"], **arrays,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise InvalidDocument(f"malformed params file: {exc}") from exc
    if not all(np.isfinite(arr).all() for arr in params.arrays().values()):
        raise InvalidDocument("params contain non-finite values")
    return params, vocab
