"""Exception types shared across the package.

Every error raised by the library derives from QkforecastError so callers
can catch the whole family at the CLI boundary.
"""

from __future__ import annotations


class QkforecastError(Exception):
    """Base class for all package errors."""


class ConfigError(QkforecastError):
    """Invalid or unreadable experiment configuration."""


# --- vector / state construction -------------------------------------------

class LengthMismatch(QkforecastError):
    """Input vector length does not match the expected dimension."""


class NotNormalized(QkforecastError):
    """Input vector is not unit L2 norm within tolerance."""


class TargetOutOfRange(QkforecastError):
    """Gate target index outside the register."""


class IndexOutOfRange(QkforecastError):
    """Index argument outside the valid range."""


class ShapeMismatch(QkforecastError):
    """Arrays disagree in shape where equal shapes are required."""


class KindMismatch(QkforecastError):
    """Kernel matrices of different kinds cannot be combined."""


# --- data ingestion / windowing ---------------------------------------------

class UnreadableInput(QkforecastError):
    """Input file is missing, unreadable, or not parseable as a table."""


class MissingColumn(QkforecastError):
    """A required column is absent from the input table."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing column: {column!r}")


class NonMonotonicTime(QkforecastError):
    """Timestamps are not strictly increasing."""


class EmptyAfterCleaning(QkforecastError):
    """No rows survived missing-value removal."""


class ZeroVariance(QkforecastError):
    """A series is constant where variance is required."""

    def __init__(self, name: str = ""):
        self.name = name
        super().__init__(f"zero variance: {name!r}" if name else "zero variance")


class SplitTooShort(QkforecastError):
    """A split slice is too short to produce a single window."""

    def __init__(self, split: str = ""):
        self.split = split
        super().__init__(f"split too short: {split!r}" if split else "split too short")


class LeakageError(QkforecastError):
    """A window or its target crosses a split boundary."""


# --- regression / optimization ----------------------------------------------

class DimensionMismatch(QkforecastError):
    """Kernel matrix and target vector dimensions disagree."""


class FactorizationFailed(QkforecastError):
    """Positive-definite factorization of the regularized kernel failed."""


class AllFitsFailed(QkforecastError):
    """Every candidate fit failed; no model can be returned."""


class OutOfBox(QkforecastError):
    """Optimization variable outside its search box."""


# --- metrics / reporting ------------------------------------------------------

class ZeroMeanObservations(QkforecastError):
    """Observed mean too close to zero for normalized error metrics."""


class NoReportsFound(QkforecastError):
    """Report aggregation found no per-station report files."""


class CacheCorrupt(QkforecastError):
    """Kernel cache file failed header or payload validation."""
