"""Media sentiment measurement and time-series testing toolkit."""

__version__ = "0.1.0"

from .errors import DataError, MediasentError, NumericError, UsageError
from .naive_bayes import NbModel, SentimentClass
from .series import Month, MonthlySeries

__all__ = [
    "DataError", "MediasentError", "NumericError", "UsageError",
    "NbModel", "SentimentClass", "Month", "MonthlySeries", "__version__",
]
