from .params import ModelParams, init_params, load_params, save_params
from .network import (
    CandidateTarget,
    ForwardRecord,
    GradientRecord,
    Prediction,
    SpanTarget,
    backward_to_attention,
    backward_to_embeddings,
    embed,
    forward,
    forward_from_attention,
    forward_from_embeddings,
    score_target,
    top_predictions,
)
from .synthetic import (
    QAExample,
    build_vocab,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
    template_vocab,
)
from .training import TrainConfig, TrainReport, exact_match, train

__all__ = [
    "ModelParams",
    "init_params",
    "load_params",
    "save_params",
    "CandidateTarget",
    "ForwardRecord",
    "GradientRecord",
    "Prediction",
    "SpanTarget",
    "backward_to_attention",
    "backward_to_embeddings",
    "embed",
    "forward",
    "forward_from_attention",
    "forward_from_embeddings",
    "score_target",
    "top_predictions",
    "QAExample",
    "build_vocab",
    "generate_synthetic_dataset",
    "template_vocab",
    "load_dataset",
    "save_dataset",
    "TrainConfig",
    "TrainReport",
    "exact_match",
    "train",
]
