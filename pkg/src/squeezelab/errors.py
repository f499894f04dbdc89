"""Exception types shared across the package.

Plain invalid arguments raise the builtin ``ValueError``; the classes here
cover the failure modes that callers may want to handle separately (and
that the CLI maps to distinct exit codes).
"""


class SqueezeLabError(Exception):
    """Base class for package-specific errors."""


class ResourceLimitError(SqueezeLabError):
    """A requested computation exceeds a documented size cap."""


class SingularConfigurationError(SqueezeLabError):
    """An estimator or formula is evaluated where it is undefined."""


class EllipseFitError(SqueezeLabError):
    """The ellipse fit received a degenerate sample set."""
