"""
Exception types shared by the analysis modules and the CLI.
"""


class ModelError(ValueError):
    """A model document or a constructed model violates the model invariants."""

    def __init__(self, message, line=None, violations=None):
        self.line = line
        self.violations = list(violations or [])
        self.detail = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    pass


class PreconditionError(ValueError):
    """Input is well formed but outside the domain of the requested analysis."""


class SelectionLimitError(RuntimeError):
    pass


class DecompositionError(RuntimeError):
    pass


class SingularSystemError(ArithmeticError):
    pass


class DichotomyError(AssertionError):
    """Maximal solutions of the two constraint systems left an item uncovered."""


class SimulationError(ValueError):
    pass
