"""Figure regeneration for swipt sweep results: reads the experiment CSVs and
renders the convergence trace and the min-received-power curves (one line per
scheme) without recomputing anything beyond the documented summaries."""

from .figures import FigureSpec, render

__all__ = ["FigureSpec", "render"]
