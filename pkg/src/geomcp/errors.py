"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit code the CLI maps it to.
"""


class GeomCPError(Exception):
    exit_code = 1


class InputError(GeomCPError, ValueError):
    """Bad data: wrong shape, non-finite values, unreadable files."""

    exit_code = 2


class DegenerateInputError(InputError):
    pass


class ConfigurationError(GeomCPError, ValueError):
    """Inconsistent or out-of-range settings."""

    exit_code = 3


class InvariantError(GeomCPError, RuntimeError):
    exit_code = 4
