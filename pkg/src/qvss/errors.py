"""Exception types shared across the package.

Argument and range violations raise the built-in ValueError / IndexError;
the classes here cover failures that callers (notably the CLI) need to
tell apart for exit-code purposes.
"""


class QvssError(Exception):
    """Base class for scheme-specific failures."""


class StateCorruptionError(QvssError):
    """A register's norm drifted beyond the runtime guard."""


class FormatError(QvssError):
    """A byte stream or image violates its format contract."""


class IntegrityError(QvssError):
    """Shares and session do not belong together."""


class IncompleteSharesError(QvssError):
    """Recovery was attempted without all n distinct shares."""
