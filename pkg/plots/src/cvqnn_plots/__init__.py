"""Figure rendering for simulator run artifacts."""

__version__ = "0.1.0"

from .render import KINDS, FigureSpec, RenderError, build_figure, render, render_run

__all__ = ["KINDS", "FigureSpec", "RenderError", "build_figure", "render", "render_run", "__version__"]
