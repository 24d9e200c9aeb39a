"""Static figures rendered from a solver run directory.

Reads only the CSV/JSON artifacts (snapshots, atoms, characteristics,
energy report, Q-series, convergence report) — never the solver's
internal state.
"""

__version__ = "0.1.0"

from .render import render, PlotError

__all__ = ["render", "PlotError", "__version__"]
