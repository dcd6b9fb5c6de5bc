#!/usr/bin/env python3
"""Satoshi ladder: multiplier, value mode and condensation across mean wallet values.

The approximate multiplier pi/sqrt(6 m) is reported next to the exact ladder root.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from csvout import write_rows
from wealthstat.bitcoin import (
    BitcoinModel,
    betabar_approx,
    condensation_ratio,
    value_mode,
)


@dataclass
class BitcoinConfig:
    mean_min: float = 10.0
    mean_max: float = 1e12
    points: int = 23
    out: str = "bitcoin.csv"


def run(cfg: BitcoinConfig):
    rows = []
    for mv in np.geomspace(cfg.mean_min, cfg.mean_max, cfg.points):
        model = BitcoinModel.from_mean_value(float(mv))
        b = model.betabar
        approx = betabar_approx(float(mv))
        rows.append((float(mv), b, approx, approx / b - 1, value_mode(b), condensation_ratio(b)))
    write_rows(cfg.out, ["mean_value", "betabar", "betabar_approx", "approx_rel_err", "mode", "condensation"], rows)
    mid = min(rows, key=lambda r: abs(np.log(r[0] / 1e6)))
    print(f"mean {mid[0]:.3g} sat: betabar {mid[1]:.6g}, approx error {mid[3]:.2e}, mode {mid[4]:.4g}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mean-min", type=float, default=BitcoinConfig.mean_min)
    ap.add_argument("--mean-max", type=float, default=BitcoinConfig.mean_max)
    ap.add_argument("--points", type=int, default=BitcoinConfig.points)
    ap.add_argument("--out", default=BitcoinConfig.out)
    run(BitcoinConfig(**vars(ap.parse_args())))
