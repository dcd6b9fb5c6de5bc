#!/usr/bin/env python3
"""Deposits spread over d banks: how mode and Gini move from bosonic (d=1) toward Poisson."""

import argparse
from dataclasses import dataclass, field

import numpy as np

from csvout import write_rows
from wealthstat import atomic_pmf, total_variation
from wealthstat.convolve import bank_convolution
from wealthstat.inequality import gini_from_pmf, gini_poisson


@dataclass
class BankConfig:
    means: list[float] = field(default_factory=lambda: [1.0, 10.0, 100.0])
    banks: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 6, 8, 16, 32, 64, 256, 1024])
    out: str = "banks.csv"


def run(cfg: BankConfig):
    rows = []
    for m in cfg.means:
        pois = atomic_pmf("poisson", m)
        for d in cfg.banks:
            pmf = bank_convolution(m, d)
            mode = int(np.argmax(pmf.probs))
            rows.append((m, d, mode, (1 - 1 / d) * m, gini_from_pmf(pmf), total_variation(pmf, pois)))
        print(f"m={m:g}: gini d=1 {rows[-len(cfg.banks)][4]:.4f} -> d={cfg.banks[-1]} {rows[-1][4]:.4f}, poisson {gini_poisson(m):.4f}")
    write_rows(cfg.out, ["m", "banks", "mode", "mode_law", "gini", "tv_to_poisson"], rows)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--means", type=float, nargs="+", default=BankConfig().means)
    ap.add_argument("--banks", type=int, nargs="+", default=BankConfig().banks)
    ap.add_argument("--out", default=BankConfig.out)
    run(BankConfig(**vars(ap.parse_args())))
