"""Publication-style figures from the solver's CSV outputs.

Two standalone scripts cover the three figure families: the convergence
trace (rate and penalized objective per iteration, penalty stages
annotated) and the two sweep charts (mean rate with error bars versus
transmit power or element count).  The scripts plot emitted columns
verbatim and never recompute statistics.
"""

from .convergence import plot_convergence
from .sweep import plot_sweep

__version__ = "0.1.0"

__all__ = ["plot_convergence", "plot_sweep"]
