"""Static figure rendering for solverq experiment CSVs."""

__version__ = "0.1.0"

from .render import PlotError, PlotSpec, render

__all__ = ["PlotError", "PlotSpec", "render"]
