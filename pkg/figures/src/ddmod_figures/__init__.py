"""Figure rendering for ddmod simulation CSVs."""
from .render import (DEFAULT_BITS_PER_FRAME, FigureSpec, SchemaError,
                     ber_floor, curve_points, parse_result_csv, render_figures)

__version__ = "0.1.0"
