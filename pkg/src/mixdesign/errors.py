"""Exception hierarchy shared by all modules.

Each CLI exit code maps to one of these families, so the classes stay
coarse on purpose.
"""


class MixDesignError(Exception):
    """Base class for all package errors."""


class ConfigError(MixDesignError):
    """Invalid configuration value (bad alpha, fraction, mask bound, ...)."""


class SchemaError(MixDesignError):
    """Input file header does not match the expected column schema."""


class ParseError(MixDesignError):
    """A cell in the input file could not be parsed as a number."""


class ValidationError(MixDesignError):
    """A parsed value violates a domain invariant (negative mass, age < 1)."""


class ContractError(MixDesignError):
    """Caller violated an operation precondition (shape mismatch etc.)."""


class NumericError(MixDesignError):
    """Non-finite values appeared where finite numbers are required."""


class TrainingError(MixDesignError):
    """Training diverged or could not produce a usable checkpoint."""


class QueryError(MixDesignError):
    """An inverse-design query is malformed (unknown variable, bad count)."""
