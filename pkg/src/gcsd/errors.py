"""Exception hierarchy shared by all modules."""


class GCSDError(Exception):
    """Base class for all library errors."""


class ConfigError(GCSDError):
    """Invalid configuration value (non-positive bandwidth, bad dimension, ...)."""


class InputError(GCSDError):
    """Structurally invalid input: shape mismatch, too few groups, bad identifiers."""


class DomainError(GCSDError):
    """Input values outside the mathematical domain (NaN/Inf entries)."""


class DegenerateDataError(GCSDError):
    """Data carries no usable scale (all points identical, zero variance)."""


class DegenerateClusterError(GCSDError):
    """An assignment column has (numerically) zero mass; its log term diverges."""


class OracleResolutionError(GCSDError):
    """Quadrature grid too coarse to resolve a density to the required mass accuracy."""


class ParseError(InputError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
