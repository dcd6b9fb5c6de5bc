"""Ownership-based wealth distributions for distinguishable and identical wealth."""

from .core import (
    INF,
    AtomicKind,
    GentileParams,
    Pmf,
    SpeciesSpec,
    WealthClass,
    atomic_pmf,
    total_variation,
    truncated_geometric,
    truncated_geometric_mean,
    truncated_poisson,
    truncated_poisson_mean,
)
from .solver import WealthSystem, solve_beta_distinguishable, solve_betabar, solve_system

__version__ = "0.1.0"
