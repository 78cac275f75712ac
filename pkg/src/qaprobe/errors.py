"""Exception taxonomy shared across the workbench.

Every error raised by a qaprobe module is one of these; the HTTP layer
maps each class to exactly one (status, machine code) pair.
"""


class QaProbeError(Exception):
    """Base class for all workbench errors."""


class InvalidInput(QaProbeError):
    """Malformed question/context/candidates."""


class InputTooLong(QaProbeError):
    """Token sequence exceeds the model's maximum length."""


class InvalidTarget(QaProbeError):
    """Gradient target does not exist in the forward record."""


class InvalidLabel(QaProbeError):
    """Training label outside the context segment."""


class InvalidParam(QaProbeError):
    """Out-of-range or unknown parameter value."""


class InvalidMap(QaProbeError):
    """Saliency map with non-finite scores."""


class InvalidDocument(QaProbeError):
    """Document does not validate against its schema."""


class DanglingEdge(QaProbeError):
    """Edge references a node id that does not exist."""


class NotFound(QaProbeError):
    """Unknown id (knowledge graph, node, skill, ...)."""


class Conflict(QaProbeError):
    """Attempt to create something that already exists."""


class NoEntitiesFound(QaProbeError):
    """No knowledge-graph entities could be linked to the text."""


class UnsupportedSkill(QaProbeError):
    """Operation is not available for this skill kind."""
