"""Exception types.

``DataError`` subclasses signal bad input data (CLI exit code 2); the rest are
programming or definition errors.
"""


class DataError(ValueError):
    """Input data violates a format or model invariant."""


class UnitMismatch(DataError):
    pass


class UnsortedInput(DataError):
    pass


class UnknownStream(DataError):
    pass


class KindMismatch(DataError):
    pass


class IngestError(DataError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class PatternError(ValueError):
    """Base class for event-pattern definition errors."""


class PatternSyntaxError(PatternError):
    def __init__(self, message, line, column, expected=(), token=None):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        self.token = token
        detail = f"line {line}, column {column}: {message}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class DuplicateDefinition(PatternError):
    pass


class UnknownDetector(PatternError):
    pass


class UnresolvedReference(PatternError):
    def __init__(self, name, detail=""):
        self.name = name
        super().__init__(f"unresolved reference {name!r}" + (f": {detail}" if detail else ""))


class AmbiguousReference(PatternError):
    pass
