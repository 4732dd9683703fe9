"""
Base exception for the quadfree package.

Every module-level error type derives from QuadfreeError so the CLI can map
the whole family to a single exit code.
"""


class QuadfreeError(Exception):
    """Base class for all quadfree errors."""
    pass
