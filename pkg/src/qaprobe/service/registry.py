"""Skill registry: named model configurations persisted as one JSON file."""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass
from typing import Optional

from ..errors import Conflict, InvalidDocument, InvalidParam, NotFound
from ..kg import KGStore
from ..model import load_params

SKILL_KINDS = ("extractive", "multiple_choice", "graph_reasoner")
SKILL_ID_RE = re.compile(r"^[a-zA-Z0-9_-]+$")


@dataclass(frozen=True)
class Skill:
    id: str
    name: str
    kind: str
    params_file: str
    kg: Optional[str] = None

    def doc(self) -> dict:
        return {"id": self.id, "name": self.name, "kind": self.kind,
                "params_file": self.params_file, "kg": self.kg}


def skill_from_doc(doc: dict) -> Skill:
    if not isinstance(doc, dict):
        raise InvalidDocument("skill document must be an object")
    for key in ("id", "name", "kind", "params_file"):
        if not isinstance(doc.get(key), str) or not doc[key]:
            raise InvalidDocument(f"skill field {key!r} must be a non-empty string")
    if not SKILL_ID_RE.match(doc["id"]):
        raise InvalidDocument(f"skill id must match {SKILL_ID_RE.pattern}")
    if doc["kind"] not in SKILL_KINDS:
        raise InvalidDocument(
            f"skill kind must be one of {list(SKILL_KINDS)}, got {doc['kind']!r}")
    kg = doc.get("kg")
    if kg is not None and (not isinstance(kg, str) or not kg):
        raise InvalidDocument("skill field 'kg' must be a non-empty string")
    if doc["kind"] == "graph_reasoner" and kg is None:
        raise InvalidDocument("graph_reasoner skills need a 'kg' reference")
    extra = set(doc) - {"id", "name", "kind", "params_file", "kg"}
    if extra:
        raise InvalidDocument(f"skill document has unknown fields {sorted(extra)}")
    return Skill(id=doc["id"], name=doc["name"], kind=doc["kind"],
                 params_file=doc["params_file"], kg=kg)


class SkillRegistry:
    """Thread-safe map of skill id -> Skill, persisted to skills.json.

    Params files are validated at registration and cached after first
    load; the cache key is the path, so every skill sharing a params
    file shares the loaded arrays.
    """

    def __init__(self, path: str, store: Optional[KGStore] = None):
        self.path = path
        self._store = store
        self._lock = threading.Lock()
        self._skills: dict[str, Skill] = {}
        self._params_cache: dict[str, tuple] = {}
        if os.path.exists(path):
            with open(path) as fh:
                doc = json.load(fh)
            for item in doc.get("skills", []):
                skill = skill_from_doc(item)
                self._skills[skill.id] = skill

    def _persist(self) -> None:
        doc = {"skills": [self._skills[i].doc() for i in sorted(self._skills)]}
        with open(self.path, "w") as fh:
            json.dump(doc, fh, indent=2)

    def register(self, doc: dict) -> Skill:
        skill = skill_from_doc(doc)
        self.load_model(skill.params_file)  # rejects bad files up front
        if skill.kind == "graph_reasoner" and self._store is not None:
            self._store.get(skill.kg)  # NotFound if the KG is missing
        with self._lock:
            if skill.id in self._skills:
                raise Conflict(f"skill {skill.id!r} already registered")
            self._skills[skill.id] = skill
            self._persist()
        return skill

    def get(self, skill_id: str) -> Skill:
        skill = self._skills.get(skill_id)
        if skill is None:
            raise NotFound(f"no skill with id {skill_id!r}")
        return skill

    def list(self) -> list[Skill]:
        return [self._skills[i] for i in sorted(self._skills)]

    def load_model(self, params_file: str):
        """(params, vocab) for a params file, cached by path."""
        with self._lock:
            cached = self._params_cache.get(params_file)
        if cached is not None:
            return cached
        if not os.path.exists(params_file):
            raise InvalidDocument(f"params file {params_file!r} does not exist")
        loaded = load_params(params_file)
        with self._lock:
            self._params_cache[params_file] = loaded
        return loaded

    def model_for(self, skill: Skill):
        return self.load_model(skill.params_file)
