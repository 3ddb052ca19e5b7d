"""Exception types shared across the package."""


class CrsolveError(Exception):
    """Base class for package errors."""


class PoleProximityError(CrsolveError):
    """A sphere point is too close to the chart pole (0, -1) to map reliably."""


class ConfigError(CrsolveError):
    """Invalid run configuration (bad value, unknown key, malformed file)."""


# Kept as an alias so callers can catch the narrower name used in config code.
InvalidConfigError = ConfigError


class GridMismatchError(CrsolveError):
    """Binary operation between grid functions living on different grids."""


class BasisMismatchError(CrsolveError):
    """Coefficient vector used with a basis it was not computed in."""


class NonIntegrableError(CrsolveError):
    """Truncated Heisenberg integral dominated by its outer shell."""


class PreconditionViolated(UserWarning):
    """Soft flag: data fails an orthogonality hypothesis.

    Solvers still return a least-squares answer; the component that violates
    the hypothesis is reported in the diagnostics.
    """
