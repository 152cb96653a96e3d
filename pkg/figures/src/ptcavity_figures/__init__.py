"""Figure rendering for the coupled-cavity metrology reproduction CSVs."""

from .render import EmptyDataError, FIGURES, FigureSpec, SchemaError, load_table, render

__version__ = "0.1.0"

__all__ = ["EmptyDataError", "FIGURES", "FigureSpec", "SchemaError", "load_table", "render"]
