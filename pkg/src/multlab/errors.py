"""Error taxonomy shared by all computational modules.

Plain ``ValueError`` is used for invalid arguments (bad ranges, unknown
names, malformed input).  The subclasses below distinguish failures that
callers may want to map to dedicated exit codes or HTTP categories.
"""


class NumericDomainError(ValueError):
    """A computed value left the representable floating-point domain."""


class DegenerateInputError(ValueError):
    """Structurally valid input on which the requested quantity is undefined."""


class ResourceLimitError(RuntimeError):
    """The computation would exceed a documented memory or size bound."""
