"""Word-level vocabulary with fixed special-token ids."""

from __future__ import annotations

from typing import Iterable, Sequence

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"

SPECIAL_TOKENS = (CLS_TOKEN, SEP_TOKEN, PAD_TOKEN, UNK_TOKEN)

CLS_ID = 0
SEP_ID = 1
PAD_ID = 2
UNK_ID = 3
NUM_SPECIAL = len(SPECIAL_TOKENS)


class Vocabulary:
    """Dense id space 0..V-1; ids 0-3 are reserved for CLS/SEP/PAD/UNK."""

    def __init__(self, words: Iterable[str]):
        self._surfaces: list[str] = list(SPECIAL_TOKENS)
        self._ids: dict[str, int] = {s: i for i, s in enumerate(SPECIAL_TOKENS)}
        for word in words:
            if word in self._ids:
                continue
            self._ids[word] = len(self._surfaces)
            self._surfaces.append(word)

    def __len__(self) -> int:
        return len(self._surfaces)

    def __contains__(self, surface: str) -> bool:
        return surface in self._ids

    def lookup(self, surface: str) -> int:
        """Id for a surface form, UNK_ID when absent."""
        return self._ids.get(surface, UNK_ID)

    def surface(self, token_id: int) -> str:
        return self._surfaces[token_id]

    def is_special(self, token_id: int) -> bool:
        return token_id < len(SPECIAL_TOKENS)

    def entries(self) -> list[tuple[str, int]]:
        return [(s, i) for i, s in enumerate(self._surfaces)]

    @classmethod
    def from_entries(cls, entries: Sequence[tuple[str, int]]) -> "Vocabulary":
        """Rebuild from (surface, id) pairs; ids must be dense and in order."""
        ordered = sorted(entries, key=lambda e: e[1])
        surfaces = [s for s, _ in ordered]
        if surfaces[: len(SPECIAL_TOKENS)] != list(SPECIAL_TOKENS):
            raise ValueError("special tokens must occupy ids 0-3")
        ids = [i for _, i in ordered]
        if ids != list(range(len(ids))):
            raise ValueError("vocabulary ids must be dense 0..V-1")
        return cls(surfaces[len(SPECIAL_TOKENS):])
