"""Error taxonomy shared by the library, the CLI, and the HTTP service.

Every error carries a stable machine-readable ``code`` (the class name) plus an
optional ``details`` mapping; the service serializes both verbatim so clients can
render precise assistance messages.
"""

from __future__ import annotations


class VsoError(Exception):
    """Base class for all engine errors."""

    code = "VsoError"

    def __init__(self, message: str, **details: object) -> None:
        super().__init__(message)
        self.message = message
        self.details = details


class DanglingReference(VsoError):
    code = "DanglingReference"


class CyclicContainment(VsoError):
    code = "CyclicContainment"


class NoMethodSelected(VsoError):
    code = "NoMethodSelected"


class MissingUri(VsoError):
    code = "MissingUri"


class UnknownImage(VsoError):
    code = "UnknownImage"


class UnknownInstance(VsoError):
    code = "UnknownInstance"


class UnknownModel(VsoError):
    code = "UnknownModel"


class UnknownMethod(VsoError):
    code = "UnknownMethod"


class UnknownEndpoint(VsoError):
    code = "UnknownEndpoint"


class UnknownConnection(VsoError):
    code = "UnknownConnection"


class SemanticMismatch(VsoError):
    code = "SemanticMismatch"


class InputOccupied(VsoError):
    code = "InputOccupied"


class AmbiguousConnection(VsoError):
    code = "AmbiguousConnection"


class UnmappedElement(VsoError):
    code = "UnmappedElement"


class UnknownConfiguration(VsoError):
    code = "UnknownConfiguration"


class CycleDetected(VsoError):
    code = "CycleDetected"


class DisconnectedRequiredInput(VsoError):
    code = "DisconnectedRequiredInput"


class MissingTemplate(VsoError):
    code = "MissingTemplate"


class UnresolvedPlaceholder(VsoError):
    code = "UnresolvedPlaceholder"


class ParseError(VsoError):
    code = "ParseError"


class SchemaVersionUnsupported(VsoError):
    code = "SchemaVersionUnsupported"


class ValidationFailed(VsoError):
    code = "ValidationFailed"

    def __init__(self, message: str, report: object = None, **details: object) -> None:
        super().__init__(message, **details)
        self.report = report


class CatalogVersionMismatch(VsoError):
    code = "CatalogVersionMismatch"


class UnknownSession(VsoError):
    code = "UnknownSession"


class UnknownVocabulary(VsoError):
    code = "UnknownVocabulary"


class StaleRevision(VsoError):
    code = "StaleRevision"
