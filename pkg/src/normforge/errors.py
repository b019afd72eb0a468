"""Exception and warning types shared across normforge."""

from __future__ import annotations


class NormforgeError(Exception):
    """Base class for all errors raised by normforge."""


class LiteralSyntaxError(NormforgeError, ValueError):
    pass


class UnsupportedModalityError(NormforgeError, ValueError):
    pass


class LrmlParseError(NormforgeError):
    """Malformed XML, located by line and column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{loc}")


class StructuralError(NormforgeError):
    """An element appears where the supported vocabulary does not allow it."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{loc}")


class MalformedHeadError(StructuralError):
    """A rule head that would compile to a rule without a head literal."""


class DanglingReferenceError(NormforgeError):
    def __init__(self, key: str, message: str | None = None):
        self.key = key
        super().__init__(message or f"dangling reference: {key!r}")


class DuplicateKeyError(NormforgeError):
    def __init__(self, key: str, line: int | None = None):
        self.key = key
        self.line = line
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate key {key!r}{loc}")


class ConstraintViolation(NormforgeError):
    """The document is well-formed but violates a norm-modelling constraint."""


class LabelOverflowError(NormforgeError):
    pass


class UnknownJurisdictionError(NormforgeError):
    def __init__(self, key: str, known: list[str]):
        self.key = key
        self.known = known
        super().__init__(f"unknown jurisdiction {key!r}; known: {', '.join(known) or '(none)'}")


class UnboundVariableError(NormforgeError):
    pass


class TransformError(NormforgeError):
    """Aggregates per-statement failures of a transformation run."""

    def __init__(self, failures: list[tuple[str, Exception]]):
        self.failures = failures
        lines = [f"{key}: {exc}" for key, exc in failures]
        super().__init__("transformation failed:\n  " + "\n  ".join(lines))


class DflSyntaxError(NormforgeError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class NormforgeWarning(UserWarning):
    """Recoverable oddities: unknown elements, unmatched associations and so on."""


class ReferenceTypeError(NormforgeError, TypeError):
    """A reference resolves, but to an element of the wrong kind."""
