"""Figures for budget-sweep experiment CSVs."""

from .errors import EmptyData, MeanMismatch, PlotsError, SchemaMismatch
from .figures import AggregateRow, crosscheck, read_aggregates, render

__all__ = [
    "AggregateRow",
    "EmptyData",
    "MeanMismatch",
    "PlotsError",
    "SchemaMismatch",
    "crosscheck",
    "read_aggregates",
    "render",
]
