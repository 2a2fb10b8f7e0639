"""Exception hierarchy.

Everything raised on purpose derives from :class:`QidlabError`.  The CLI maps
:class:`InvariantViolation` to exit status 2 and every other subclass to 1.
"""

from __future__ import annotations


class QidlabError(Exception):
    """Base class for expected, reportable failures."""


class ValidationError(QidlabError, ValueError):
    """An input object violates one of its type invariants.

    ``invariant`` names the violated property so callers (and the CLI) can
    report it without parsing the message.
    """

    invariant = "validation"

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value


class NonHermitian(ValidationError):
    invariant = "NonHermitian"


class NotPSD(ValidationError):
    invariant = "NotPSD"


class TraceNotOne(ValidationError):
    invariant = "TraceNotOne"


class NotAnEffect(ValidationError):
    invariant = "NotAnEffect"


class IncompletePOM(ValidationError):
    invariant = "IncompletePOM"


class NotNormalized(ValidationError):
    invariant = "NotNormalized"


class NonRationalInput(ValidationError):
    invariant = "NonRationalInput"


class DimensionMismatch(QidlabError, ValueError):
    pass


class IndexOutOfRange(QidlabError, IndexError):
    pass


class BadLetter(QidlabError, ValueError):
    pass


class SizeMismatch(QidlabError, ValueError):
    pass


class ResourceLimit(QidlabError):
    """A requested computation exceeds a configured cap."""


class AlphabetTooLarge(ResourceLimit):
    pass


class NotFound(QidlabError):
    """A search finished without meeting its target.

    ``best`` carries the best candidate seen (may be ``None``) and
    ``best_error`` its error value.
    """

    def __init__(self, message: str, best=None, best_error: float | None = None):
        super().__init__(message)
        self.best = best
        self.best_error = best_error


class EmptyGoodSet(QidlabError):
    pass


class TargetUnreachable(QidlabError):
    def __init__(self, message: str, family=None):
        super().__init__(message)
        self.family = family


class PreconditionError(QidlabError, ValueError):
    pass


class PrerequisiteNotVerified(QidlabError):
    pass


class ParseError(QidlabError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class InvariantViolation(QidlabError, AssertionError):
    """A property that must hold by construction failed.  Always a bug."""
