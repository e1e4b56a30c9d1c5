"""Shared exception types."""


class DataError(Exception):
    """Raised when supplied data violates a loader or pipeline contract.

    The CLI maps this to exit code 2 (data error), as opposed to usage
    errors (exit code 1).
    """
