"""Exception hierarchy for the softwhip toolkit."""


class SoftwhipError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(SoftwhipError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateGeometryError(SoftwhipError):
    """Geometry too degenerate to process (coincident points, zero-length path)."""


class MaskPipelineError(SoftwhipError):
    """Base class for per-frame mask-extraction failures."""


class EmptyMaskError(MaskPipelineError):
    """Mask has no foreground pixels."""


class AmbiguousTopologyError(MaskPipelineError):
    """Skeleton topology cannot be reduced to a single midline path."""


class EmptySequenceError(SoftwhipError):
    """Every frame of a sequence failed extraction."""


class DegenerateProfileError(SoftwhipError):
    """Velocity profile has no usable peak (all-zero speeds)."""


class DegenerateFieldError(SoftwhipError):
    """Curvature field is identically zero."""


class ConfigError(SoftwhipError):
    """Config file cannot be parsed or validated."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SimulationDivergedError(SoftwhipError):
    """Time integration produced non-finite or exploding state.

    ``partial`` carries whatever frames were emitted before divergence,
    ``diagnostics`` a small dict with the failing step and time.
    """

    def __init__(self, message, partial=None, diagnostics=None):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = dict(diagnostics or {})
