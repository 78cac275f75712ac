"""Service configuration: one JSON file, QAPROBE_* env-var overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from typing import Optional

from ..errors import InvalidDocument


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: str = "data"
    hop_cap: int = 3
    timeout_seconds: float = 30.0
    static_dir: Optional[str] = None
    # analysis defaults applied when a request omits the parameter
    saliency_method: str = "integrated_grad"
    ig_steps: int = 50
    smoothgrad_samples: int = 25
    smoothgrad_seed: int = 0
    hotflip_budget: int = 3
    hotflip_neighbors: int = 10
    reasoner_hops: int = 2
    reasoner_layers: int = 2
    reasoner_seed: int = 0


_ENV_PREFIX = "QAPROBE_"


def load_config(path: Optional[str] = None,
                env: Optional[dict] = None) -> ServiceConfig:
    """File values under env values; unknown file keys are rejected."""
    cfg = ServiceConfig()
    by_name = {f.name: f for f in fields(ServiceConfig)}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise InvalidDocument(f"cannot read config {path!r}: {err}")
        if not isinstance(doc, dict):
            raise InvalidDocument("config file must hold a JSON object")
        for key, value in doc.items():
            if key not in by_name:
                raise InvalidDocument(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    env = os.environ if env is None else env
    for name, f in by_name.items():
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is None:
            continue
        if f.type in ("int", int):
            setattr(cfg, name, int(raw))
        elif f.type in ("float", float):
            setattr(cfg, name, float(raw))
        else:
            setattr(cfg, name, raw)
    cfg.port = int(cfg.port)
    cfg.hop_cap = int(cfg.hop_cap)
    cfg.timeout_seconds = float(cfg.timeout_seconds)
    return cfg
