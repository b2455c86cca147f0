"""Exception types raised by the package.

Argument and domain errors are plain ``ValueError``s.
"""


class ResourceError(MemoryError):
    """A requested size exceeds the configured memory budget."""


class NumericError(ArithmeticError):
    """A numerical routine produced a non-finite or unconverged result."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
