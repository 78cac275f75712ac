"""Lowercase word-level tokenization with punctuation split.

Word-level (no subwords) so that attacks can replace or delete whole
words; layout is [CLS] question [SEP] context [SEP], or for
multiple-choice inputs [CLS] question [SEP] cand1 [SEP] cand2 [SEP] ...
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from .errors import InvalidInput
from .vocab import CLS_ID, CLS_TOKEN, SEP_ID, SEP_TOKEN, Vocabulary

_WORD_RE = re.compile(r"\w+|[^\w\s]")

SEG_SPECIAL = "special"
SEG_QUESTION = "question"
SEG_CONTEXT = "context"
SEG_CANDIDATE = "candidate"

KIND_EXTRACTIVE = "extractive"
KIND_MULTIPLE_CHOICE = "multiple_choice"


def split_words(text: str) -> list[str]:
    """Lowercase and split into words and single punctuation marks."""
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class Token:
    id: int
    surface: str
    segment: str
    position: int
    candidate_index: Optional[int] = None


@dataclass(frozen=True)
class TokenizedInput:
    tokens: tuple[Token, ...]
    kind: str

    def __len__(self) -> int:
        return len(self.tokens)

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tokens)

    @cached_property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @cached_property
    def question_positions(self) -> tuple[int, ...]:
        return tuple(t.position for t in self.tokens if t.segment == SEG_QUESTION)

    @cached_property
    def context_positions(self) -> tuple[int, ...]:
        return tuple(t.position for t in self.tokens if t.segment == SEG_CONTEXT)

    @cached_property
    def num_candidates(self) -> int:
        indexes = {t.candidate_index for t in self.tokens if t.candidate_index is not None}
        return len(indexes)

    def candidate_positions(self, index: int) -> tuple[int, ...]:
        return tuple(t.position for t in self.tokens if t.candidate_index == index)

    @cached_property
    def question_text(self) -> str:
        return " ".join(self.tokens[p].surface for p in self.question_positions)

    @cached_property
    def context_text(self) -> str:
        return " ".join(self.tokens[p].surface for p in self.context_positions)

    def span_text(self, start: int, end: int) -> str:
        return " ".join(t.surface for t in self.tokens[start : end + 1])


def _words_or_invalid(text: str, what: str) -> list[str]:
    words = split_words(text)
    if not words:
        raise InvalidInput(f"{what} has no tokens")
    return words


def tokenize(
    question: str,
    context: Optional[str] = None,
    candidates: Optional[Sequence[str]] = None,
    vocab: Optional[Vocabulary] = None,
) -> TokenizedInput:
    """Build the CLS/SEP token layout for one model input.

    Exactly one of ``context`` (extractive) or ``candidates``
    (multiple-choice) must be non-empty. Out-of-vocabulary words keep
    their surface but map to the UNK id.
    """
    if vocab is None:
        raise InvalidInput("a vocabulary is required")
    if not question or not split_words(question):
        raise InvalidInput("question must be non-empty")
    has_context = context is not None and split_words(context) != []
    has_candidates = bool(candidates)
    if has_context == has_candidates:
        raise InvalidInput("provide exactly one of context or candidates")
    if has_candidates and len(candidates) < 2:
        raise InvalidInput("multiple choice needs at least two candidates")

    tokens: list[Token] = []

    def push(surface: str, segment: str, token_id: Optional[int] = None,
             candidate_index: Optional[int] = None) -> None:
        tid = vocab.lookup(surface) if token_id is None else token_id
        tokens.append(Token(tid, surface, segment, len(tokens), candidate_index))

    push(CLS_TOKEN, SEG_SPECIAL, CLS_ID)
    for word in _words_or_invalid(question, "question"):
        push(word, SEG_QUESTION)
    push(SEP_TOKEN, SEG_SPECIAL, SEP_ID)

    if has_context:
        for word in _words_or_invalid(context or "", "context"):
            push(word, SEG_CONTEXT)
        push(SEP_TOKEN, SEG_SPECIAL, SEP_ID)
        kind = KIND_EXTRACTIVE
    else:
        assert candidates is not None
        for index, candidate in enumerate(candidates):
            for word in _words_or_invalid(candidate, f"candidate {index}"):
                push(word, SEG_CANDIDATE, candidate_index=index)
            push(SEP_TOKEN, SEG_SPECIAL, SEP_ID)
        kind = KIND_MULTIPLE_CHOICE

    return TokenizedInput(tokens=tuple(tokens), kind=kind)


def rebuild(
    question_words: Sequence[str],
    context_words: Optional[Sequence[str]],
    candidates: Optional[Sequence[Sequence[str]]],
    vocab: Vocabulary,
) -> TokenizedInput:
    """Re-tokenize from already-split word lists (used by attacks)."""
    question = " ".join(question_words)
    context = " ".join(context_words) if context_words is not None else None
    cand_texts = [" ".join(c) for c in candidates] if candidates is not None else None
    return tokenize(question, context, cand_texts, vocab)
