"""Exception hierarchy shared by all lqglab modules."""


class LqgError(Exception):
    """Base class for all lqglab errors."""


class ConfigurationError(LqgError):
    """Invalid domain spec, experiment config, or mismatched metadata."""


class ParameterError(LqgError):
    """A numeric parameter (gamma, d, ...) is outside its valid range."""


class DomainError(LqgError):
    """A geometric object (circle, ball, probe) leaves the domain."""


class ShapeError(LqgError):
    """Two grids that must share a lattice do not."""


class PreconditionError(LqgError):
    """An operation precondition (scale separation, replicate count) fails."""


class InputError(LqgError):
    """Malformed numeric input, e.g. nonpositive values where a log is taken."""


class ExperimentError(LqgError):
    """Too many replicate failures or an unrecoverable experiment state."""
