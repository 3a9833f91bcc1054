"""Exception hierarchy shared by the library and the command-line tool.

The three leaf classes map one-to-one onto the CLI exit codes:
ConfigError -> 2, PreconditionError -> 3, SelfCheckError -> 4.
"""


class LocmomError(Exception):
    """Base class for all errors raised by locmom."""


class ConfigError(LocmomError):
    """Malformed configuration: bad recipe text, invalid grid parameters,
    unknown flags or field values."""


class PreconditionError(LocmomError):
    """A numerical precondition is violated: state does not fit the window,
    stability guard tripped, moment-order cap exceeded, masked region
    carries non-negligible probability, and similar."""


class SelfCheckError(LocmomError):
    """An internal cross-check between two routes to the same quantity
    failed; points at a bug or accuracy loss rather than bad input."""
