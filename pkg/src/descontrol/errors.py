"""Exception hierarchy shared by all modules."""


class ModelError(ValueError):
    """Base class for malformed models and failed preconditions."""


class ParseError(ModelError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlphabetError(ModelError):
    """Alphabets disagree (names or controllability)."""


class CapExceeded(ModelError):
    """An explicit-state construction grew past its configured cap."""


class SynthesisError(ModelError):
    pass


class ConflictError(ModelError):
    """Two transitions compete for the same event in one region."""


class DomainError(ModelError):
    """A variable left its declared integer domain."""


class ControllabilityBreach(RuntimeError):
    """A supervisor refused an uncontrollable event."""
