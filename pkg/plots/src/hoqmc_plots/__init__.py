"""Convergence figures for hoqmc experiment CSVs."""

from hoqmc_plots.render import FigureSpec, load_csv, render

__all__ = ["FigureSpec", "load_csv", "render"]

__version__ = "0.1.0"
