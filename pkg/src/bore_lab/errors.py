"""Exception taxonomy shared across the package.

ValueError (and the ConfigError subclass) marks bad input: the caller gave
us parameters or files that violate a documented precondition.  The CLI
maps these to exit code 2.  NumericsError marks a run-time numerical
failure on valid input (nonconvergence, blow-up, exhausted span); the CLI
maps these to exit code 3.
"""


class NumericsError(RuntimeError):
    """A numerical procedure failed at run time."""


class IntegrationError(NumericsError):
    """An ODE/PDE integration could not be completed."""


class RootFindError(NumericsError):
    """A root-finding iteration failed to converge."""


class ConfigError(ValueError):
    """Invalid user configuration: unknown key, bad value, bad combination."""
