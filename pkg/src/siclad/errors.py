"""Exception types shared across the package."""


class SicladError(Exception):
    """Base class for all errors raised by this package."""


class IngestionError(SicladError):
    """Malformed input data (CSV parsing, shape mismatches)."""


class DegenerateDirectionError(SicladError):
    """The test direction carries no variance; the hypothesis cannot be tested."""


class RegionConsistencyError(SicladError):
    """Internal invariant violated while building a truncation region."""


class MassUnderflowError(SicladError):
    """A truncation region carries too little probability mass to normalize."""
