"""figplot: figure rendering for voxfpt experiment CSVs."""
from .render import (CSV_HEADER, FIGURE_SPECS, EmptySelectionError,
                     FigureSpec, RenderReport, SchemaError, render)

__version__ = "0.1.0"

__all__ = ["CSV_HEADER", "FIGURE_SPECS", "EmptySelectionError", "FigureSpec",
           "RenderReport", "SchemaError", "render"]
