"""Bitcoin as a ladder of bosonic UTXO denominations w = 1, 2, ..., d (in satoshi).

Each denomination is geometric in its count with the shared multiplier
``betabar``; the total value then follows the integer-partition law
P(v) = P(0) p(v) exp(-v betabar) for v <= d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convolve import ValuePmf
from .solver import _root

__all__ = [
    "BTC_HARD_CAP",
    "MAX_VALUE_SUPPORT",
    "BitcoinModel",
    "PartitionTable",
    "betabar_approx",
    "condensation_ratio",
    "hardy_ramanujan_ratio",
    "log_ladder_generating_function",
    "log_peak_ratio",
    "log_zero_value_probability",
    "partition_numbers",
    "solve_betabar_bitcoin",
    "total_value_mean",
    "total_value_mean_derivative",
    "utxo_popularity",
    "value_distribution",
    "value_mode",
]

BTC_HARD_CAP = 2_100_000_000_000_000
MAX_VALUE_SUPPORT = 10**7
# ladder sums stop once terms drop below this fraction of the running total
TERM_RTOL = 1e-18
_CHUNK = 1 << 20


@dataclass(frozen=True)
class PartitionTable:
    """Exact partition numbers p(0..V)."""

    values: tuple[int, ...]

    def __getitem__(self, v: int) -> int:
        return self.values[v]

    def __len__(self) -> int:
        return len(self.values)

    def log(self) -> np.ndarray:
        return np.array([math.log(p) for p in self.values])


def partition_numbers(v_max: int) -> PartitionTable:
    """p(0..v_max) from Euler's pentagonal-number recurrence, in exact integers."""
    if v_max < 0:
        raise ValueError("v_max must be >= 0")
    if v_max > MAX_VALUE_SUPPORT:
        raise ValueError(f"v_max {v_max} exceeds the supported {MAX_VALUE_SUPPORT}")
    p = [1] + [0] * v_max
    # generalized pentagonal numbers j(3j-1)/2 for j = 1, -1, 2, -2, ...
    pent = []
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        if g1 > v_max:
            break
        sign = 1 if j % 2 else -1
        pent.append((g1, sign))
        g2 = j * (3 * j + 1) // 2
        if g2 <= v_max:
            pent.append((g2, sign))
        j += 1
    for n in range(1, v_max + 1):
        total = 0
        for g, sign in pent:
            if g > n:
                break
            total += sign * p[n - g]
        p[n] = total
    return PartitionTable(tuple(p))


def utxo_popularity(denomination, betabar: float):
    """Expected number of UTXOs of the given denomination per address, 1/(e^{i b} - 1)."""
    if not betabar > 0:
        raise ValueError("betabar must be positive")
    i = np.asarray(denomination, dtype=float)
    out = 1.0 / np.expm1(i * betabar)
    return float(out) if out.ndim == 0 else out


def _ladder_sum(term, betabar: float, max_denomination: int) -> float:
    """Sum term(i) over i = 1..max_denomination, stopping once terms are negligible.

    Terms decay like i^a exp(-i betabar), so once past the peak and below
    TERM_RTOL of the running total the rest is dropped.
    """
    total = 0.0
    start = 1
    peak = max(2.0 / betabar, 1.0)
    while start <= max_denomination:
        stop = min(start + _CHUNK, max_denomination + 1)
        with np.errstate(over="ignore"):
            vals = term(np.arange(start, stop, dtype=float))
        total += float(vals.sum())
        if stop - 1 > peak and abs(vals[-1]) <= TERM_RTOL * abs(total):
            break
        start = stop
    return total


def total_value_mean(betabar: float, max_denomination: int = BTC_HARD_CAP) -> float:
    """sum_{i <= d} i / (e^{i betabar} - 1)."""
    if not betabar > 0:
        raise ValueError("betabar must be positive")
    return _ladder_sum(lambda i: i / np.expm1(i * betabar), betabar, max_denomination)


def total_value_mean_derivative(betabar: float, max_denomination: int = BTC_HARD_CAP) -> float:
    def term(i):
        x = i * betabar
        return -(i * i) * np.exp(-x) / np.expm1(-x) ** 2

    return _ladder_sum(term, betabar, max_denomination)


def betabar_approx(mean_value: float) -> float:
    """pi / sqrt(6 mean_value), from replacing the ladder sum by an integral."""
    if not mean_value > 0:
        raise ValueError("mean value must be positive")
    return math.pi / math.sqrt(6.0 * mean_value)


def solve_betabar_bitcoin(mean_value: float, max_denomination: int = BTC_HARD_CAP) -> float:
    """Exact root of sum_{i <= d} i/(e^{i b} - 1) = mean_value."""
    if not mean_value > 0:
        raise ValueError("mean value must be positive")

    def g(b):
        return total_value_mean(b, max_denomination) - mean_value

    def dg(b):
        return total_value_mean_derivative(b, max_denomination)

    guess = betabar_approx(mean_value)
    return _root(g, dg, guess / 2, guess * 2, allow_negative=False)


def log_zero_value_probability(betabar: float, max_denomination: int = BTC_HARD_CAP) -> float:
    """log P(0) = sum_{i <= d} log(1 - e^{-i betabar})."""
    if not betabar > 0:
        raise ValueError("betabar must be positive")
    return _ladder_sum(lambda i: np.log1p(-np.exp(-i * betabar)), betabar, max_denomination)


def log_ladder_generating_function(betabar: float, max_denomination: int, q: float) -> float:
    """log Z(q) = sum_i [log(1 - e^{-i b}) - log(1 - (q e^{-b})^i)]."""
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    log_ratio = math.log(q) - betabar if q > 0 else -math.inf

    def term(i):
        return np.log1p(-np.exp(-i * betabar)) - np.log1p(-np.exp(i * log_ratio))

    return _ladder_sum(term, betabar, max_denomination)


@dataclass(frozen=True)
class BitcoinModel:
    betabar: float
    max_denomination: int = BTC_HARD_CAP
    mean_value: float | None = None

    def __post_init__(self):
        if not self.betabar > 0:
            raise ValueError("betabar must be positive")
        if self.max_denomination < 1:
            raise ValueError("max_denomination must be >= 1")
        if self.mean_value is None:
            object.__setattr__(self, "mean_value", total_value_mean(self.betabar, self.max_denomination))

    @classmethod
    def from_mean_value(cls, mean_value: float, max_denomination: int = BTC_HARD_CAP) -> BitcoinModel:
        return cls(solve_betabar_bitcoin(mean_value, max_denomination), max_denomination, mean_value)

    def consistency(self) -> float:
        """Relative mismatch between mean_value and the ladder sum at betabar."""
        exact = total_value_mean(self.betabar, self.max_denomination)
        return abs(exact - self.mean_value) / self.mean_value


def value_distribution(model: BitcoinModel, v_max: int, table: PartitionTable | None = None) -> ValuePmf:
    """P(v) = P(0) p(v) e^{-v betabar} for v = 0..v_max (requires v_max <= d)."""
    if v_max > model.max_denomination:
        raise ValueError(f"v_max {v_max} exceeds the largest denomination {model.max_denomination}")
    if v_max > MAX_VALUE_SUPPORT:
        raise ValueError(f"v_max {v_max} exceeds the supported {MAX_VALUE_SUPPORT}")
    if table is None or len(table) <= v_max:
        table = partition_numbers(v_max)
    logp = np.array([math.log(table[v]) for v in range(v_max + 1)])
    v = np.arange(v_max + 1)
    probs = np.exp(log_zero_value_probability(model.betabar, model.max_denomination) + logp - v * model.betabar)
    return ValuePmf(probs, max(0.0, 1.0 - float(probs.sum())))


def hardy_ramanujan_ratio(v, betabar: float):
    """Asymptotic P(v)/P(0) = exp(pi sqrt(2v/3) - v betabar) / (4 v sqrt 3); valid for v >~ 100."""
    v = np.asarray(v, dtype=float)
    out = np.exp(math.pi * np.sqrt(2.0 * v / 3.0) - v * betabar) / (4.0 * v * math.sqrt(3.0))
    return float(out) if out.ndim == 0 else out


def value_mode(betabar: float) -> float:
    """Most probable total value (pi^2/(6 b^2)) ((1 + sqrt(1 - 24 b/pi^2))/2)^2."""
    if not betabar > 0:
        raise ValueError("betabar must be positive")
    disc = 1.0 - 24.0 * betabar / math.pi**2
    if disc < 0:
        raise ValueError(f"betabar {betabar} >= pi^2/24: the mode formula has no real value")
    return math.pi**2 / (6.0 * betabar**2) * ((1.0 + math.sqrt(disc)) / 2.0) ** 2


def log_peak_ratio(betabar: float) -> float:
    """log of max_v P(v)/P(0) ~ (sqrt 3 b^2 / (2 pi^2)) exp(pi^2/(6 b))."""
    return math.log(math.sqrt(3.0) * betabar**2 / (2.0 * math.pi**2)) + math.pi**2 / (6.0 * betabar)


def condensation_ratio(betabar: float, max_denomination: int = BTC_HARD_CAP) -> float:
    """Share of the mean total value held in the one-satoshi denomination."""
    return utxo_popularity(1, betabar) / total_value_mean(betabar, max_denomination)
