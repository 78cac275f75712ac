"""Synthetic corpus generation and the toy training loop."""

import numpy as np
import pytest

from qaprobe.errors import InvalidParam
from qaprobe.model import (
    TrainConfig,
    exact_match,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
    template_vocab,
    train,
)
from qaprobe.tokenizer import tokenize


def test_dataset_is_deterministic():
    a = generate_synthetic_dataset(7, 50, dev_count=10)
    b = generate_synthetic_dataset(7, 50, dev_count=10)
    assert a == b
    c = generate_synthetic_dataset(8, 50, dev_count=10)
    assert a != c


def test_dataset_answers_are_context_spans():
    vocab = template_vocab()
    for ex in generate_synthetic_dataset(3, 40):
        words = ex.context.split()
        assert 0 <= ex.answer_start <= ex.answer_end < len(words)
        # every word the model must read is in the template vocabulary
        inp = tokenize(ex.question, ex.context, None, vocab)
        assert "[UNK]" not in inp.surfaces


def test_disjoint_fillers_split_entities():
    examples = generate_synthetic_dataset(5, 60, dev_count=15,
                                          disjoint_fillers=True)
    train_fillers = set().union(*(ex.fillers for ex in examples[:-15]))
    dev_fillers = set().union(*(ex.fillers for ex in examples[-15:]))
    assert not train_fillers & dev_fillers


def test_dataset_round_trip(tmp_path):
    examples = generate_synthetic_dataset(11, 25)
    path = str(tmp_path / "items.jsonl")
    save_dataset(path, examples)
    loaded = load_dataset(path)
    assert [(e.question, e.context, e.answer_start, e.answer_end)
            for e in loaded] == \
        [(e.question, e.context, e.answer_start, e.answer_end)
         for e in examples]


def test_short_training_run_reduces_loss():
    examples = generate_synthetic_dataset(2, 60, dev_count=12)
    vocab = template_vocab()
    config = TrainConfig(epochs=3, seed=1, dev_count=12, d=32, dff=48)
    params, report = train(examples, vocab, config)
    assert report.train_items == 48
    assert report.dev_items == 12
    assert len(report.history) == 3
    assert report.history[-1] < report.history[0]
    assert np.isfinite(report.final_loss)
    assert 0.0 <= report.dev_exact_match <= 1.0


def test_same_seed_same_params():
    examples = generate_synthetic_dataset(2, 40)
    vocab = template_vocab()
    config = TrainConfig(epochs=2, seed=9, d=32, dff=48)
    p1, _ = train(examples, vocab, config)
    p2, _ = train(examples, vocab, config)
    first, second = p1.arrays(), p2.arrays()
    for name in first:
        assert np.array_equal(first[name], second[name]), name


def test_empty_dataset_rejected():
    with pytest.raises(InvalidParam):
        train([], template_vocab(), TrainConfig(epochs=1))


def test_exact_match_on_perfect_memorizer():
    # an untrained model on one item is very unlikely to hit the gold span,
    # while the metric itself stays within [0, 1]
    examples = generate_synthetic_dataset(4, 10)
    vocab = template_vocab()
    params, _ = train(examples, vocab, TrainConfig(epochs=1, seed=0, d=32, dff=48))
    em = exact_match(params, examples, vocab)
    assert 0.0 <= em <= 1.0
