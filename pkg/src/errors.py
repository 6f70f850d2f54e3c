from typing import Any
from src.config import EXIT_FAILURE, EXIT_SCHEMA, EXIT_PRECISION, EXIT_VIOLATION


class IwalabError(Exception):
    """Base class for every domain error; carries an exit code and a payload."""
    exit_code = EXIT_FAILURE

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details = details


class SchemaError(IwalabError):
    exit_code = EXIT_SCHEMA

    def __init__(self, message: str, line: int | None = None, column: int | None = None, **details: Any) -> None:
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message, line=line, column=column, **details)


class UnknownFormula(SchemaError):
    pass


class PrecisionError(IwalabError):
    """Raised when the working precision cannot decide a result."""
    exit_code = EXIT_PRECISION


class PrecisionExhausted(PrecisionError):
    pass


class TDepthExhausted(PrecisionError):
    pass


class InvalidPrecision(IwalabError):
    pass


class NotAUnit(IwalabError):
    pass


class NotDistinguished(IwalabError):
    pass


class NotSquare(IwalabError):
    pass


class ZeroDeterminant(IwalabError):
    pass


class InfiniteQuotient(IwalabError):
    pass


class Unstable(PrecisionError):
    pass


class NotAssociative(IwalabError):
    pass


class NoIdentity(IwalabError):
    pass


class NotPPower(IwalabError):
    pass


class GroupTooLarge(IwalabError):
    pass


class BoundaryMismatch(IwalabError):
    pass


class NotAComplex(IwalabError):
    pass


class NotChainMap(IwalabError):
    pass


class NotMuZero(IwalabError):
    pass


class MuNotZeroAtTop(IwalabError):
    pass


class SearchBudgetExceeded(IwalabError):
    pass


class NotAnnihilating(IwalabError):
    pass


class LengthTooShort(IwalabError):
    pass


class MissingLocalData(IwalabError):
    pass


class TheoremViolation(IwalabError):
    exit_code = EXIT_VIOLATION
