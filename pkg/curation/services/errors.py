from __future__ import annotations


class CurationError(ValueError):
    """Base error for the curation pipeline; ``exit_code`` is what the CLI returns."""

    exit_code = 1


class ConfigError(CurationError):
    exit_code = 1


class DataError(CurationError):
    exit_code = 2


class NumericalError(CurationError, ArithmeticError):
    exit_code = 3
