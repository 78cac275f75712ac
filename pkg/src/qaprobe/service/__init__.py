"""HTTP service: wire encoding, config, skill registry, FastAPI app."""

from .app import create_app
from .config import ServiceConfig, load_config
from .registry import Skill, SkillRegistry
from .wire import dumps_canonical

__all__ = ["create_app", "ServiceConfig", "load_config", "Skill",
           "SkillRegistry", "dumps_canonical"]
