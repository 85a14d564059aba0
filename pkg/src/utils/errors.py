# src/utils/errors.py

from typing import Any, Dict, Optional


class SparseLimitError(Exception):
    """Base for every domain error raised by the services. `code` is the stable identifier used in result dicts."""

    code = "SparseLimitError"

    def __init__(self, message: str, *, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_result(self) -> Dict[str, Any]:
        result = {"status": "error", "code": self.code, "message": self.message}
        if self.details:
            result["details"] = self.details
        return result


# --- vocabulary ---
class VocabularyError(SparseLimitError):
    code = "VocabularyError"

    def __init__(self, message: str, issues=None):
        super().__init__(message, details={"issues": [str(i) for i in (issues or [])]})
        self.issues = list(issues or [])


class NonGroup(VocabularyError):
    code = "NonGroup"


class BadPair(VocabularyError):
    code = "BadPair"


class ArityMismatch(VocabularyError):
    code = "ArityMismatch"


class LengthMismatch(SparseLimitError):
    code = "LengthMismatch"


class UnknownVocabulary(SparseLimitError):
    code = "UnknownVocabulary"


# --- structure ---
class UnknownVertex(SparseLimitError):
    code = "UnknownVertex"


class NotConnected(SparseLimitError):
    code = "NotConnected"


class TooLargeForSaturation(SparseLimitError):
    code = "TooLargeForSaturation"


class Unreachable(SparseLimitError):
    code = "Unreachable"


class StructureFormatError(SparseLimitError):
    code = "StructureFormatError"


class ExcludedEdge(SparseLimitError):
    code = "ExcludedEdge"


# --- sampler ---
class Overflow(SparseLimitError):
    code = "Overflow"


# --- fo ---
class FormulaSyntaxError(SparseLimitError):
    code = "SyntaxError"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}", details={"position": position})
        self.position = position


class UnknownRelation(SparseLimitError):
    code = "UnknownRelation"


class ArityError(SparseLimitError):
    code = "ArityError"


class UnboundVariable(SparseLimitError):
    code = "UnboundVariable"


class BudgetExceeded(SparseLimitError):
    code = "BudgetExceeded"


# --- tree types / limits ---
class NotATree(SparseLimitError):
    code = "NotATree"


class CapExceeded(SparseLimitError):
    code = "CapExceeded"


class PartialRegistry(SparseLimitError):
    code = "PartialRegistry"


class RegistryMissing(SparseLimitError):
    code = "RegistryMissing"


class RichnessCheckFailed(SparseLimitError):
    code = "RichnessCheckFailed"


class NotSimple(SparseLimitError):
    code = "NotSimple"


class NonPositiveBeta(SparseLimitError):
    code = "NonPositiveBeta"


class FamilyError(SparseLimitError):
    """Raised by expression constructors when an argument lies outside the family grammar."""

    code = "FamilyError"


# --- cnf ---
class BadRelation(SparseLimitError):
    code = "BadRelation"


class DimacsError(SparseLimitError):
    code = "DimacsError"
