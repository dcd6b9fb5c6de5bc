#!/usr/bin/env python3
"""Lorenz curves at a few means and Gini coefficients over a range of means.

Writes <prefix>_lorenz.csv (long format: kind, m, x, y) and <prefix>_gini.csv.
"""

import argparse
from dataclasses import dataclass, field

import numpy as np

from csvout import write_rows
from wealthstat import atomic_pmf
from wealthstat.inequality import (
    gini_bosonic,
    gini_bosonic_lorenz,
    gini_fermionic,
    gini_poisson,
    lorenz_from_pmf,
    lorenz_geometric_analytic,
    lorenz_poisson_continuous,
    pareto_8020_mean,
)


@dataclass
class LorenzConfig:
    means: list[float] = field(default_factory=lambda: [0.35, 0.47, 1.0, 5.0])
    grid: int = 200
    gini_points: int = 100
    prefix: str = "inequality"


def lorenz_rows(cfg: LorenzConfig):
    xs = np.linspace(0.0, 1.0, cfg.grid + 1)
    rows = []
    for m in cfg.means:
        for x, y in zip(xs, lorenz_geometric_analytic(m, xs)):
            rows.append(("geometric", m, float(x), float(y)))
        for x in xs:
            rows.append(("poisson-continuous", m, float(x), lorenz_poisson_continuous(m, float(x))))
        # breakpoint curves, exact polygon vertices
        for kind in ("poisson", "bosonic"):
            curve = lorenz_from_pmf(atomic_pmf(kind, m, 1e-13))
            rows += [(f"{kind}-breakpoints", m, float(x), float(y)) for x, y in curve.points]
    return rows


def gini_rows(cfg: LorenzConfig):
    rows = []
    for m in np.geomspace(0.01, 100.0, cfg.gini_points):
        m = float(m)
        gf = gini_fermionic(m) if m <= 1 else float("nan")
        rows.append((m, gini_poisson(m), gini_bosonic(m), gini_bosonic_lorenz(m), gf))
    return rows


def run(cfg: LorenzConfig):
    write_rows(f"{cfg.prefix}_lorenz.csv", ["kind", "m", "x", "y"], lorenz_rows(cfg))
    write_rows(
        f"{cfg.prefix}_gini.csv",
        ["m", "poisson", "bosonic", "bosonic_lorenz_integral", "fermionic"],
        gini_rows(cfg),
    )
    print(f"80/20 means: poisson {pareto_8020_mean('poisson'):.4f}, bosonic {pareto_8020_mean('bosonic'):.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--means", type=float, nargs="+", default=LorenzConfig().means)
    ap.add_argument("--grid", type=int, default=LorenzConfig.grid)
    ap.add_argument("--gini-points", type=int, default=LorenzConfig.gini_points)
    ap.add_argument("--prefix", default=LorenzConfig.prefix)
    run(LorenzConfig(**vars(ap.parse_args())))
