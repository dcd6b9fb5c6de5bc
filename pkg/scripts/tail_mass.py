#!/usr/bin/env python3
"""Probability of holding more than the mean, Poisson versus bosonic, over a log grid of m.

    python scripts/tail_mass.py --out tail_mass.csv
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from csvout import write_rows
from wealthstat.inequality import tail_mass_above_mean


@dataclass
class TailConfig:
    m_min: float = 1e-2
    m_max: float = 1e4
    points: int = 121
    out: str = "tail_mass.csv"


def run(cfg: TailConfig):
    rows = []
    for m in np.geomspace(cfg.m_min, cfg.m_max, cfg.points):
        p = tail_mass_above_mean("poisson", float(m))
        b = tail_mass_above_mean("bosonic", float(m))
        rows.append((float(m), p, b, p / b))
    write_rows(cfg.out, ["m", "poisson", "bosonic", "ratio"], rows)
    last = rows[-1]
    print(f"m={last[0]:g}: poisson {last[1]:.4f} (-> 1/2), bosonic {last[2]:.4f} (-> 1/e = {math.exp(-1):.4f})")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--m-min", type=float, default=TailConfig.m_min)
    ap.add_argument("--m-max", type=float, default=TailConfig.m_max)
    ap.add_argument("--points", type=int, default=TailConfig.points)
    ap.add_argument("--out", default=TailConfig.out)
    run(TailConfig(**vars(ap.parse_args())))
