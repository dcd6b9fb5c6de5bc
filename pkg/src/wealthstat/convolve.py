"""Aggregating wealth across species: weighted convolutions and their closed forms."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .core import (
    DEFAULT_TAIL_TOL,
    INF,
    Pmf,
    atomic_pmf,
    delta_pmf,
    truncated_geometric,
    truncated_poisson,
)
from .solver import WealthSystem

__all__ = [
    "SignedPmf",
    "ValuePmf",
    "bank_convolution",
    "bank_generating_function",
    "fermionic_binomial",
    "generating_function",
    "net_balance",
    "net_balance_single_bank",
    "poisson_additivity_check",
    "poisson_geometric_convolve",
    "poisson_geometric_tail",
    "system_parts",
    "weighted_convolve",
]


class ValuePmf(Pmf):
    """Pmf indexed by total value v (in value units) instead of a count."""

    def generating(self, q: float) -> float:
        return float(np.polynomial.polynomial.polyval(q, self.probs))


@dataclass(frozen=True, eq=False)
class SignedPmf:
    """Pmf over integers a = min_value .. min_value + len(probs) - 1."""

    probs: np.ndarray
    min_value: int
    truncation_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or np.any(p < 0):
            raise ValueError("probs must be a non-negative 1-d sequence")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.min_value, self.min_value + self.probs.size)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def at(self, a: int) -> float:
        i = a - self.min_value
        if 0 <= i < self.probs.size:
            return float(self.probs[i])
        return 0.0


def _spread(pmf: Pmf, w: int, size: int) -> np.ndarray:
    g = np.zeros(size)
    k = np.arange(min(pmf.probs.size, (size - 1) // w + 1))
    g[k * w] = pmf.probs[: k.size]
    return g


def _default_vmax(parts: Sequence[tuple[Pmf, int]]) -> int:
    mean = sum(w * p.mean for p, w in parts)
    var = sum(w * w * p.variance for p, w in parts)
    top = sum(w * (len(p) - 1) for p, w in parts)
    return int(min(top, math.ceil(mean + 20 * math.sqrt(var))))


def weighted_convolve(parts: Sequence[tuple[Pmf, int]], v_max: int | None = None) -> ValuePmf:
    """Distribution of the total value sum_I w_I k_I of independent counts.

    Mass landing above ``v_max`` (default: mean + 20 sd, capped at the largest
    representable value) goes into ``truncation_mass`` together with the
    parts' own truncation bounds.
    """
    parts = [(p, int(w)) for p, w in parts]
    for _, w in parts:
        if w < 1:
            raise ValueError(f"weights must be >= 1, got {w}")
    if v_max is None:
        v_max = _default_vmax(parts)
    if v_max < 0:
        raise ValueError("v_max must be >= 0")
    size = v_max + 1
    acc = np.zeros(size)
    acc[0] = 1.0
    lost = sum(p.truncation_mass for p, _ in parts)
    for pmf, w in parts:
        g = _spread(pmf, w, size)
        before = acc.sum() * pmf.total
        acc = np.convolve(acc, g)[:size]
        lost += max(before - acc.sum(), 0.0)
    return ValuePmf(acc, lost)


def system_parts(system: WealthSystem, tail_tol: float = DEFAULT_TAIL_TOL) -> list[tuple[Pmf, int]]:
    """Per-species marginal laws of a solved system with their weights."""
    if not system.solved:
        raise ValueError("system must be solved first")
    if system.ladder:
        raise ValueError("ladder systems are handled by the bitcoin module")
    parts = []
    for s, beta in zip(system.species, system.betas):
        if s.distinguishable:
            parts.append((truncated_poisson(beta, s.cutoff, tail_tol), s.weight))
        else:
            parts.append((truncated_geometric(system.betabar * s.weight, s.cutoff, tail_tol), s.weight))
    return parts


def generating_function(system: WealthSystem, q: float) -> float:
    """Z(q) = sum_v P(v) q^v of the total value of a solved system."""
    if not 0 <= q <= 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if not system.solved:
        raise ValueError("system must be solved first")
    logz = 0.0
    for s, beta in zip(system.species, system.betas):
        w = s.weight
        if s.distinguishable:
            if s.cutoff == INF:
                logz += math.exp(-beta) * (q**w - 1.0)
            else:
                logz += _log_trunc_poisson_gf(beta, int(s.cutoff), q**w)
        else:
            b = system.betabar * w
            qw = q**w
            if s.cutoff == INF:
                logz += math.log(math.expm1(b)) - math.log(math.exp(b) - qw)
            else:
                logz += _log_trunc_geometric_gf(b, int(s.cutoff), qw)
    if system.ladder:
        from .bitcoin import log_ladder_generating_function

        logz += log_ladder_generating_function(system.betabar, system.ladder, q)
    return math.exp(logz)


def _log_trunc_poisson_gf(beta: float, cutoff: int, qw: float) -> float:
    k = np.arange(cutoff + 1)
    logw = -beta * k - special.gammaln(k + 1)
    if qw == 0:
        return -float(special.logsumexp(logw))
    return float(special.logsumexp(logw + k * math.log(qw)) - special.logsumexp(logw))


def _log_trunc_geometric_gf(b: float, cutoff: int, qw: float) -> float:
    n = cutoff + 1
    if b > 0:
        first = math.log(math.expm1(b)) - math.log(math.exp(b) - qw)
        second = math.log(math.exp(n * b) - qw**n) - math.log(math.expm1(n * b)) if n * b < 700 else 0.0
        return first + second
    k = np.arange(n)
    logw = -b * k
    if qw == 0:
        return -float(special.logsumexp(logw))
    return float(special.logsumexp(logw + k * math.log(qw)) - special.logsumexp(logw))


def bank_convolution(m: float, banks: int, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Deposit count summed over ``banks`` equal geometric laws (negative binomial).

    P(k) = C(d + k - 1, k) (d/(m+d))^d (m/(m+d))^k with d = ``banks``.
    """
    if not m >= 0:
        raise ValueError(f"mean must be >= 0, got {m}")
    if int(banks) != banks or banks < 1:
        raise ValueError(f"banks must be a positive integer, got {banks}")
    if m == 0:
        return delta_pmf(0)
    d = int(banks)
    p_success = d / (m + d)
    kmax = int(stats.nbinom.isf(tail_tol, d, p_success))
    while stats.nbinom.sf(kmax, d, p_success) >= tail_tol:
        kmax += 1
    k = np.arange(kmax + 1)
    logp = (
        special.gammaln(d + k)
        - special.gammaln(d)
        - special.gammaln(k + 1)
        + d * (math.log(d) - math.log(m + d))
        + k * (math.log(m) - math.log(m + d))
    )
    return Pmf(np.exp(logp), float(stats.nbinom.sf(kmax, d, p_success)))


def bank_generating_function(m: float, banks: int, q: float) -> float:
    """[d / (d - m (q - 1))]^d."""
    return (banks / (banks - m * (q - 1.0))) ** banks


def fermionic_binomial(total: int, owners: int, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Binomial(total, 1/owners): ``total`` fermionic units spread over owners."""
    if int(owners) != owners or owners < 1:
        raise ValueError("owners must be a positive integer")
    if int(total) != total or total < 0:
        raise ValueError("total must be a non-negative integer")
    n, p = int(total), 1.0 / owners
    if p == 1.0:
        return delta_pmf(n)
    kmax = n
    if n > 0:
        cut = int(stats.binom.isf(tail_tol, n, p))
        while cut < n and stats.binom.sf(cut, n, p) >= tail_tol:
            cut += 1
        kmax = min(n, cut)
    k = np.arange(kmax + 1)
    logp = (
        special.gammaln(n + 1)
        - special.gammaln(n - k + 1)
        - special.gammaln(k + 1)
        + (n - k) * math.log1p(-p)
        + k * math.log(p)
    )
    trunc = float(stats.binom.sf(kmax, n, p)) if kmax < n else 0.0
    return Pmf(np.exp(logp), trunc)


def poisson_geometric_convolve(m: float, mbar: float, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Poisson(m) count plus an independent bosonic geometric count of mean ``mbar``.

    Closed form (e^{-m}/(mbar+1)) r^k sum_{j<=k} c^j/j! with r = mbar/(mbar+1)
    and c = m + m/mbar.  ``mbar == 0`` leaves the pure Poisson law.
    """
    if not (m >= 0 and mbar >= 0):
        raise ValueError("means must be >= 0")
    if mbar == 0:
        return atomic_pmf("poisson", m, tail_tol)
    if m == 0:
        return atomic_pmf("bosonic", mbar, tail_tol)
    pois = atomic_pmf("poisson", m, tail_tol / 2)
    geom = atomic_pmf("bosonic", mbar, tail_tol / 2)
    kmax = len(pois) + len(geom) - 2
    k = np.arange(kmax + 1)
    c = m + m / mbar
    log_partial = np.logaddexp.accumulate(k * math.log(c) - special.gammaln(k + 1))
    logp = -m - math.log1p(mbar) + k * (math.log(mbar) - math.log1p(mbar)) + log_partial
    return Pmf(np.exp(logp), pois.truncation_mass + geom.truncation_mass)


def poisson_geometric_tail(m: float, mbar: float, k) -> np.ndarray:
    """Large-k asymptote e^{m/mbar}/(mbar+1) (mbar/(mbar+1))^k of the convolution."""
    k = np.asarray(k, dtype=float)
    return np.exp(m / mbar - math.log1p(mbar) + k * (math.log(mbar) - math.log1p(mbar)))


def net_balance(m1: float, m2: float, banks: int = 1, tail_tol: float = DEFAULT_TAIL_TOL) -> SignedPmf:
    """Deposit minus debt, each a ``banks``-fold geometric convolution."""
    if not (m1 >= 0 and m2 >= 0):
        raise ValueError("means must be >= 0")
    dep = bank_convolution(m1, banks, tail_tol / 2)
    debt = bank_convolution(m2, banks, tail_tol / 2)
    probs = np.convolve(dep.probs, debt.probs[::-1])
    return SignedPmf(probs, -(len(debt) - 1), dep.truncation_mass + debt.truncation_mass)


def net_balance_single_bank(m1: float, m2: float, a) -> np.ndarray:
    """Closed form of the single-bank net balance law at integer(s) ``a``."""
    a = np.asarray(a)
    pos = (m1 / (m1 + 1)) ** np.abs(a)
    neg = (m2 / (m2 + 1)) ** np.abs(a)
    return np.where(a >= 0, pos, neg) / (m1 + m2 + 1)


def poisson_additivity_check(m1: float, m2: float, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Direct convolution of Poisson(m1) and Poisson(m2); equals Poisson(m1 + m2)."""
    a = atomic_pmf("poisson", m1, tail_tol / 2)
    b = atomic_pmf("poisson", m2, tail_tol / 2)
    return Pmf(np.convolve(a.probs, b.probs), a.truncation_mass + b.truncation_mass)
