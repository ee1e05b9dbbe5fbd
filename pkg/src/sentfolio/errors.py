"""Exception hierarchy shared across the package."""


class SentfolioError(Exception):
    """Base class for all package errors."""


class ParseError(SentfolioError):
    """Malformed input file; message names the offending line."""


class ValidationError(SentfolioError):
    """Data violates a domain invariant (duplicate dates, bad prices, ...)."""


class InsufficientDataError(SentfolioError):
    """Not enough rows/observations for the requested operation."""


class ConfigurationError(SentfolioError):
    """A configuration value produces an unusable setup (e.g. empty split)."""


class AlignmentError(SentfolioError):
    """Series could not be joined on a common date axis."""


class DegenerateInputError(SentfolioError):
    """Zero-variance or otherwise degenerate statistical input."""


class SingularDesignError(SentfolioError):
    """Regressor matrix is rank deficient."""


class DimensionError(SentfolioError):
    """Array shape does not match the model configuration."""


class DivergenceError(SentfolioError):
    """Training produced a non-finite loss."""


class DegenerateMarketError(SentfolioError):
    """All sampled portfolios have (near-)zero volatility."""
