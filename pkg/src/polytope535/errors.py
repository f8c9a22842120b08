"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class CycleFormatError(EngineError):
    """Malformed cycle notation. Carries the character position of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class WordSyntaxError(EngineError):
    """Malformed word text. Carries the character position of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DegreeMismatchError(EngineError):
    """Permutations of different degrees were combined."""


class UnassignedGeneratorError(EngineError):
    """A word uses a generator the assignment does not cover."""


class EnumerationCapExceeded(EngineError):
    """A group is too large for the requested exhaustive enumeration."""

    def __init__(self, message: str, order: int, cap: int):
        super().__init__(message)
        self.order = order
        self.cap = cap


class CosetLimitExceeded(EngineError):
    """Todd-Coxeter ran out of coset space. Carries the incomplete table."""

    def __init__(self, message: str, table=None, diagnostics: dict | None = None):
        super().__init__(message)
        self.table = table
        self.diagnostics = diagnostics or {}


class IncompleteTableError(EngineError):
    """An operation that needs a complete coset table got an incomplete one."""


class OrbitBudgetExceeded(EngineError):
    """A conjugation orbit outgrew its node budget. Carries the partial count."""

    def __init__(self, message: str, partial_count: int, budget: int):
        super().__init__(message)
        self.partial_count = partial_count
        self.budget = budget


class NonSemisparseInputError(EngineError):
    """An orbit census met an orbit size that no semisparse subgroup can produce."""

    def __init__(self, message: str, orbit_size: int, subgroup_order: int):
        super().__init__(message)
        self.orbit_size = orbit_size
        self.subgroup_order = subgroup_order


class SchemaError(EngineError):
    """A bundled or user data file violates its schema. Carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class VerificationError(EngineError):
    """An internal consistency check failed; signals a wrongly built group."""
