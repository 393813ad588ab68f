"""Exception types shared across the package."""


class FormatError(Exception):
    """A dataset or model file is malformed, truncated, or has an unknown
    magic/version."""


class NumericError(RuntimeError):
    """A numeric failure such as a non-finite training loss."""
