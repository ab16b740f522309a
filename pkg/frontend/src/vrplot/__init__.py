"""Plot helper for visibility-region MIMO sweep results.

Reads the simulator's CSV output (schema-checked) and renders static
SINR-vs-region-size figures, one panel per mask normalization.
"""

from .errors import NoDataError, SchemaError, VrPlotError
from .figure import PlotSpec, RenderResult, Series, build_series, render
from .reader import CSV_HEADER, SweepRow, read_sweep

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "NoDataError",
    "PlotSpec",
    "RenderResult",
    "SchemaError",
    "Series",
    "SweepRow",
    "VrPlotError",
    "build_series",
    "read_sweep",
    "render",
    "__version__",
]
