class BLMixError(Exception):
    """Base class for package errors."""


class DomainError(BLMixError, ValueError):
    """An argument lies outside the support or domain of an operation."""


class NumericalError(BLMixError, ArithmeticError):
    """A computation produced a non-finite value."""


class CorpusFormatError(BLMixError, ValueError):
    """A persisted corpus file is malformed."""
