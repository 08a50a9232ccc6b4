"""Exception types shared across the library."""


class VolmcError(Exception):
    """Base class for all library errors."""


class MeshError(VolmcError):
    """Invalid or non-manifold mesh connectivity."""


class NotSeamlessError(VolmcError):
    """Parametrization violates seamlessness beyond tolerance; run the sanitizer."""


class IntegrityError(VolmcError):
    """Internal consistency violation (e.g. a wall field that is not a tracer fixpoint)."""


class ParseError(VolmcError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
