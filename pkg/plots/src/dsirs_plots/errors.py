class PlotsError(Exception):
    """Base class for figure-pipeline failures."""


class SchemaMismatch(PlotsError):
    """A CSV file does not match the documented schema."""


class MeanMismatch(SchemaMismatch):
    """Aggregates disagree with means recomputed from the raw results."""


class EmptyData(PlotsError):
    """No data rows to plot."""
