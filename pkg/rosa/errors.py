"""
Exception hierarchy for the rosa package.

Every domain failure raised by the library is a RosaError, so the CLI can
turn it into a machine-readable JSON error and exit code 1.
"""

from typing import Any, Dict, List, Optional


class RosaError(Exception):
    """Base class for all domain errors."""

    code = "rosa_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class InvalidParameter(RosaError, ValueError):
    """A parameter is outside its documented domain (odd n, k out of range...)."""

    code = "invalid_parameter"


class PrecisionExhausted(RosaError):
    """Interval refinement could not separate two algebraic reals."""

    code = "precision_exhausted"


class OrderingTie(RosaError):
    """Two crossing events compared equal where the geometry forbids ties."""

    code = "ordering_tie"


class PreconditionFailed(RosaError):
    """An operation was called on input violating its precondition."""

    code = "precondition_failed"


class NoMatching(RosaError):
    """No Kenyon matching exists; `prop` names the first violated property."""

    code = "no_matching"

    def __init__(self, prop: str, message: str, details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        details["property"] = prop
        super().__init__(message, details)
        self.prop = prop


class Stuck(RosaError):
    """Chain peeling found no ready crossing."""

    code = "stuck"


class ConsistencyError(RosaError):
    """A produced tiling or patch failed post-hoc validation."""

    code = "consistency_error"


class LimitExceeded(RosaError):
    """The backtracking search exceeded its node budget."""

    code = "limit_exceeded"


class CornerConditionFailed(RosaError):
    """A metatile corner cannot carry narrow rhombi on both sides."""

    code = "corner_condition_failed"


class ConflictError(RosaError):
    """Two metatile placements disagree on a shared location."""

    code = "conflict"


class PatchTooLarge(RosaError):
    """A patch would exceed the configured tile cap."""

    code = "patch_too_large"


class NotFound(RosaError):
    """Planar Rosa selection found no admissible index up to max_i."""

    code = "not_found"

    def __init__(self, max_i: int, log: List[Dict[str, Any]]):
        super().__init__(f"no admissible candidate edgeword for i <= {max_i}",
                         {"max_i": max_i, "log": log})
        self.max_i = max_i
        self.log = log


class DegenerateMultigrid(RosaError):
    """Three grid lines meet at one point."""

    code = "degenerate_multigrid"


class InsufficientData(RosaError):
    """Too few iterations to produce a verdict."""

    code = "insufficient_data"


class SchemaError(RosaError):
    """A JSON document does not follow the patch or spectrum schema."""

    code = "schema_error"
