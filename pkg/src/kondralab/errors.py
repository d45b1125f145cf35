"""Exception types shared across the package."""


class KondraError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(KondraError, ValueError):
    """A template, weight or mesh parameter is outside its admissible range."""


class WeightDomainError(KondraError, ValueError):
    """A weight primitive was evaluated at a point where it is singular."""


class GradingError(KondraError, RuntimeError):
    """Mesh grading degenerated (shape-regularity lost in chart coordinates).

    Carries the offending layer index when known.
    """

    def __init__(self, message: str, layer: int | None = None):
        super().__init__(message)
        self.layer = layer


class SolverError(KondraError, RuntimeError):
    """A linear or eigenvalue solve failed to converge or hit an indefinite pivot."""


class ProvenanceError(KondraError, RuntimeError):
    """A mesh operation required construction provenance that is not available."""


class ConfigError(KondraError, ValueError):
    """A config file is malformed; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
