"""Exception types for the sweep-CSV plot helper."""


class VrPlotError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(VrPlotError):
    """The input file does not follow the sweep CSV contract."""


class NoDataError(VrPlotError):
    """The selection matched no plottable rows."""
