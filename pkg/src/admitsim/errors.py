"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A config file or experiment description failed validation."""


class BaselineInfeasibleError(RuntimeError):
    """The already-admitted links cannot all be served at the requested rate.

    Raised by the oracle and the probe when the precondition "the old
    system can serve every existing link at x_bar" does not hold; callers
    must treat this as an error, never as an admit/reject verdict.
    """
