"""Exception types shared across the package."""


class CadError(Exception):
    """Base class for all cadvote errors."""


class DataError(CadError):
    """Bad input data: malformed CSV, schema violations, out-of-range values."""


class TrainingError(CadError):
    """A trainer could not produce a model (divergence, invalid config)."""


class BundleError(CadError):
    """Model bundle cannot be read: corruption, truncation, bad magic."""


class BundleVersionError(BundleError):
    """Bundle was written by a newer format or schema version."""
