"""Shared exception types."""


class OranLabError(Exception):
    """Base class for all package errors."""


class ParseError(OranLabError):
    """A document could not be parsed at all."""


class ValidationError(OranLabError):
    """A parsed document or request violates an invariant.

    The message names the first violated invariant and the offending id.
    """
