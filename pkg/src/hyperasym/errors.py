"""Exception types shared across the package."""


class HyperasymError(Exception):
    """Base class for all package-specific failures."""


class GammaPoleError(HyperasymError, ValueError):
    """Gamma evaluated at a nonpositive integer."""


class NonConvergenceError(HyperasymError, ArithmeticError):
    """A series or quadrature failed to reach its accuracy target."""


class SingularityError(HyperasymError, ValueError):
    """Evaluation requested at (or numerically on top of) a singular point."""


class StokesViolationError(HyperasymError, ValueError):
    """Direction too close to a Stokes direction of the datum."""


class DegenerateContourError(HyperasymError, ValueError):
    """Contour construction produced a nonpositive radius."""


class GrowthBoundError(HyperasymError, ValueError):
    """Sampled datum values exceed the claimed growth envelope."""


class ScheduleError(HyperasymError, ValueError):
    """No admissible truncation schedule for the requested parameters."""


class ConfigError(HyperasymError, ValueError):
    """Problem configuration failed validation."""
