"""Exception hierarchy for the command-interface engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class KbError(EngineError):
    """Base class for knowledge-base errors."""


class UnknownApi(KbError):
    pass


class UnknownType(KbError):
    pass


class DuplicateApi(KbError):
    pass


class UnboundVariable(KbError):
    pass


class InvariantViolation(KbError):
    pass


class PhraseTooLong(KbError):
    pass


class ScSyntaxError(KbError):
    """Seed-command DSL diagnostic with a 1-based line/column position."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class CorruptFile(KbError):
    pass


class UnsupportedVersion(KbError):
    pass


class EmptyKb(EngineError):
    pass


class InvalidThresholds(EngineError):
    pass


class SessionClosed(EngineError):
    pass


class InvalidOptionIndex(EngineError):
    pass


class DegenerateTemplate(EngineError):
    pass


class OracleExhausted(EngineError):
    """The simulated user has no answer left for the agent's question."""


class CorpusError(EngineError):
    pass


class ConfigError(EngineError):
    pass
