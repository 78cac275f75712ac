import time

import numpy as np
import pytest

from qaprobe.model import (
    TrainConfig,
    generate_synthetic_dataset,
    init_params,
    template_vocab,
    train,
)
from qaprobe.tokenizer import tokenize
from qaprobe.vocab import Vocabulary

# every test that touches the trained model shares these constants
TRAIN_SEED = 13
TRAIN_SIZE = 2200
DEV_COUNT = 200


@pytest.fixture(scope="session")
def small_vocab():
    return Vocabulary([
        "what", "color", "is", "the", "sky", "blue", "sea", "green", "a",
        "crab", "where", "does", "live", "?", ".", "in", "red", "cat",
        "dog", "bird", "sits", "on",
    ])


@pytest.fixture(scope="session")
def small_input(small_vocab):
    return tokenize("What color is the sky?", "the sky is blue today maybe", None, small_vocab)


@pytest.fixture(scope="session")
def small_params(small_vocab):
    return init_params(len(small_vocab), d=32, heads=4, dff=48, seed=5)


@pytest.fixture(scope="session")
def synthetic_dataset():
    return generate_synthetic_dataset(seed=TRAIN_SEED, size=TRAIN_SIZE)


@pytest.fixture(scope="session")
def trained_model(synthetic_dataset):
    """(params, vocab, report, dev_examples) for the acceptance-grade model."""
    vocab = template_vocab()
    config = TrainConfig(seed=TRAIN_SEED, dev_count=DEV_COUNT)
    started = time.perf_counter()
    params, report = train(synthetic_dataset, vocab, config)
    report.wall_seconds = time.perf_counter() - started
    dev = synthetic_dataset[-DEV_COUNT:]
    return params, vocab, report, dev
