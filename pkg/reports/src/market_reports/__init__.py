"""Figure rendering for ces-market result bundles."""

from .render import FIGURES, FigureOutcome, RenderReport, ReportSpec, render

__version__ = "0.1.0"

__all__ = ["FIGURES", "FigureOutcome", "RenderReport", "ReportSpec", "render"]
