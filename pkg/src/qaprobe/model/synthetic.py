"""Templated extractive QA corpus over a closed entity list.

Each item pairs a question ("which color does the cat show?") with a
context of 2-3 facts of distinct kinds, one of which answers the
question. Questions are drawn from several paraphrases per kind with
lengths 5-9 words, so contexts land at varied sequence offsets and the
trained model cannot latch onto absolute positions. Answers are single
words, so gold spans have start == end.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Optional

from ..errors import InvalidParam
from ..tokenizer import split_words
from ..vocab import Vocabulary

NOUNS = [
    "cat", "dog", "bird", "fish", "horse", "rabbit", "turtle", "spider",
    "lamp", "table", "chair", "mirror", "clock", "kettle", "wrench", "hammer",
    "violin", "trumpet", "drum", "flute", "wagon", "bicycle", "canoe", "sled",
    "atlas", "ledger", "candle", "basket", "ribbon", "magnet", "anchor", "compass",
    "helmet", "lantern", "shovel", "bucket", "barrel", "whistle", "saddle", "banner",
]

COLORS = [
    "red", "blue", "green", "yellow", "purple", "orange", "silver", "golden",
    "black", "white", "crimson", "teal",
]

PLACES = [
    "kitchen", "garden", "attic", "cellar", "barn", "harbor", "meadow", "forest",
    "library", "workshop", "market", "tower", "valley", "plaza", "orchard",
]

PERSONS = [
    "alice", "bruno", "clara", "diego", "elena", "felix", "greta", "hugo",
    "iris", "jonas", "karla", "leo", "mira", "nils", "olga",
]


@dataclass(frozen=True)
class QAExample:
    question: str
    context: str
    answer_start: int  # token index within the tokenized context
    answer_end: int
    fillers: tuple[str, ...] = ()  # entity words used, for split checks

    @property
    def answer_text(self) -> str:
        words = split_words(self.context)
        return " ".join(words[self.answer_start : self.answer_end + 1])


def _make_fact(kind: str, noun: str, rng: random.Random) -> tuple[str, str]:
    """Returns (fact sentence, answer word)."""
    if kind == "color":
        answer = rng.choice(COLORS)
        return f"the {noun} is {answer} .", answer
    if kind == "location":
        answer = rng.choice(PLACES)
        return f"the {noun} is in the {answer} .", answer
    if kind == "owner":
        answer = rng.choice(PERSONS)
        return f"{answer} owns the {noun} .", answer
    raise ValueError(kind)


_QUESTIONS = {
    "color": (
        "what color is the {noun} ?",
        "which color does the {noun} show ?",
        "the {noun} is what color ?",
        "can you tell the color of the {noun} ?",
        "color of the {noun} ?",
    ),
    "location": (
        "where is the {noun} ?",
        "in which place is the {noun} ?",
        "the {noun} is in what place ?",
        "can you tell the place of the {noun} ?",
        "place of the {noun} ?",
    ),
    "owner": (
        "who owns the {noun} ?",
        "which person owns the {noun} ?",
        "the {noun} belongs to what person ?",
        "can you tell the owner of the {noun} ?",
        "owner of the {noun} ?",
    ),
}

_KINDS = tuple(_QUESTIONS)


def _make_item(rng: random.Random, nouns: list[str]) -> QAExample:
    question_kind = rng.choice(_KINDS)
    n_facts = rng.choice([2, 3])
    other = [k for k in _KINDS if k != question_kind]
    kinds = [question_kind] + rng.sample(other, n_facts - 1)
    fact_nouns = rng.sample(nouns, n_facts)

    facts = []
    gold_answer = ""
    for kind, noun in zip(kinds, fact_nouns):
        sentence, answer = _make_fact(kind, noun, rng)
        facts.append(sentence)
        if kind == question_kind:
            gold_answer = answer
    rng.shuffle(facts)
    context = " ".join(facts)

    words = split_words(context)
    position = words.index(gold_answer)
    question = rng.choice(_QUESTIONS[question_kind]).format(noun=fact_nouns[0])
    return QAExample(
        question=question,
        context=context,
        answer_start=position,
        answer_end=position,
        fillers=tuple(fact_nouns),
    )


def generate_synthetic_dataset(
    seed: int,
    size: int,
    dev_count: int = 0,
    disjoint_fillers: bool = False,
) -> list[QAExample]:
    """Deterministic templated dataset; the last ``dev_count`` items form
    the held-out split. With ``disjoint_fillers`` the dev items use noun
    fillers the train portion never sees."""
    if size <= 0:
        raise InvalidParam("size must be positive")
    if not 0 <= dev_count <= size:
        raise InvalidParam("dev_count must be between 0 and size")
    rng = random.Random(seed)
    if disjoint_fillers and dev_count > 0:
        half = len(NOUNS) // 2
        train_nouns, dev_nouns = NOUNS[:half], NOUNS[half:]
    else:
        train_nouns = dev_nouns = NOUNS
    items = [_make_item(rng, train_nouns) for _ in range(size - dev_count)]
    items += [_make_item(rng, dev_nouns) for _ in range(dev_count)]
    return items


def build_vocab(examples: list[QAExample]) -> Vocabulary:
    """Vocabulary over every word appearing in the examples."""
    words: list[str] = []
    seen = set()
    for ex in examples:
        for word in split_words(ex.question) + split_words(ex.context):
            if word not in seen:
                seen.add(word)
                words.append(word)
    return Vocabulary(sorted(words))


def template_vocab() -> Vocabulary:
    """Vocabulary over the full template lexicon (stable across datasets)."""
    fixed = [
        "what", "which", "where", "who", "can", "you", "tell", "the",
        "is", "does", "show", "owns", "belongs", "to", "of", "in",
        "color", "place", "person", "owner", "?", ".",
    ]
    return Vocabulary(sorted(set(fixed + NOUNS + COLORS + PLACES + PERSONS)))


def save_dataset(path: str, examples: list[QAExample]) -> None:
    """Line-delimited JSON: {question, context, answer_start, answer_end}."""
    with open(path, "w") as fh:
        for ex in examples:
            fh.write(json.dumps({
                "question": ex.question,
                "context": ex.context,
                "answer_start": ex.answer_start,
                "answer_end": ex.answer_end,
            }) + "\n")


def load_dataset(path: str) -> list[QAExample]:
    examples = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            examples.append(QAExample(
                question=doc["question"],
                context=doc["context"],
                answer_start=doc["answer_start"],
                answer_end=doc["answer_end"],
            ))
    return examples
