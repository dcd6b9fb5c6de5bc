"""Atomic and cutoff-truncated ownership distributions.

Distinguishable wealth follows a (truncated) Poisson law in the possession
count k, identical wealth a (truncated) geometric law.  A cutoff of 1 gives the
fermionic two-point law, an infinite cutoff the bosonic geometric law.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

INF = math.inf
DEFAULT_TAIL_TOL = 1e-12

__all__ = [
    "INF",
    "AtomicKind",
    "GentileParams",
    "Pmf",
    "WealthClass",
    "SpeciesSpec",
    "atomic_pmf",
    "delta_pmf",
    "truncated_geometric",
    "truncated_geometric_mean",
    "truncated_geometric_variance",
    "truncated_poisson",
    "truncated_poisson_mean",
    "truncated_poisson_variance",
    "total_variation",
]


class WealthClass(str, enum.Enum):
    DISTINGUISHABLE = "distinguishable"
    IDENTICAL = "identical"


class AtomicKind(str, enum.Enum):
    POISSON = "poisson"
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"


@dataclass(frozen=True)
class GentileParams:
    """Lagrange multiplier and normalization of one species' law."""

    beta: float
    norm: float
    # log of the norm, kept when the norm itself underflows
    log_norm: float | None = None

    def __post_init__(self):
        if self.log_norm is not None:
            if not math.isfinite(self.log_norm):
                raise ValueError(f"log_norm must be finite, got {self.log_norm}")
        elif not self.norm > 0:
            raise ValueError(f"norm must be positive, got {self.norm}")


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass over k = 0..K.

    ``truncation_mass`` bounds the probability sitting beyond K when the
    support had to be cut; it is zero when the full support is represented.
    """

    probs: np.ndarray
    truncation_mass: float = 0.0
    params: GentileParams | None = field(default=None, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-d sequence")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite and non-negative")
        if self.truncation_mass < 0:
            raise ValueError("truncation_mass must be >= 0")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, k: int) -> float:
        if k < 0 or k >= self.probs.size:
            return 0.0
        return float(self.probs[k])

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    @property
    def variance(self) -> float:
        k = self.support
        mu = self.mean
        return float(np.dot((k - mu) ** 2, self.probs))

    def is_normalized(self, eps: float = 1e-10) -> bool:
        return abs(self.total + self.truncation_mass - 1.0) <= eps + self.truncation_mass

    def padded(self, size: int) -> np.ndarray:
        """Probabilities zero-padded (or cut) to ``size`` cells."""
        out = np.zeros(size)
        n = min(size, self.probs.size)
        out[:n] = self.probs[:n]
        return out


def total_variation(p, q) -> float:
    """Half the L1 distance between two pmfs on a common non-negative index."""
    a = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    b = q.probs if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return 0.5 * float(np.abs(a - b).sum())


@dataclass(frozen=True)
class SpeciesSpec:
    """One kind of wealth object.

    ``mean`` is the target mean possession count and is only meaningful for
    distinguishable species; identical species get theirs from the shared
    multiplier of the value constraint.
    """

    wealth_class: WealthClass
    weight: int = 1
    cutoff: float = INF
    mean: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "wealth_class", WealthClass(self.wealth_class))
        if int(self.weight) != self.weight or self.weight < 1:
            raise ValueError(f"weight must be a positive integer, got {self.weight}")
        _check_cutoff(self.cutoff)
        if self.mean is not None:
            if not self.mean >= 0:
                raise ValueError(f"mean must be >= 0, got {self.mean}")
            if self.cutoff == 1 and self.mean >= 1:
                raise ValueError("fermionic species need mean < 1")

    @property
    def distinguishable(self) -> bool:
        return self.wealth_class is WealthClass.DISTINGUISHABLE


def _check_cutoff(cutoff) -> None:
    if cutoff == INF:
        return
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError(f"cutoff must be a positive integer or inf, got {cutoff}")


def delta_pmf(k: int) -> Pmf:
    p = np.zeros(k + 1)
    p[k] = 1.0
    return Pmf(p)


def _poisson_cut(lam: float, tail_tol: float) -> tuple[int, float]:
    """Smallest K with P(X > K) < tail_tol for X ~ Poisson(lam)."""
    if lam == 0:
        return 0, 0.0
    log_tol = math.log(tail_tol)

    def above(k):
        return stats.poisson.logsf(k, lam) >= log_tol

    guess = stats.poisson.isf(tail_tol, lam)
    hi = int(guess) if math.isfinite(guess) else math.ceil(lam)
    step = max(1, int(math.sqrt(lam)))
    while above(hi):
        hi += step
        step *= 2
    lo = -1
    # invariant: above(lo) or lo == -1, not above(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if above(mid):
            lo = mid
        else:
            hi = mid
    return hi, float(stats.poisson.sf(hi, lam))


def _log_partial_exp(logx: float, n: int) -> float:
    """log sum_{k=0}^{n} x^k / k! with x = exp(logx)."""
    k = np.arange(n + 1)
    return float(special.logsumexp(k * logx - special.gammaln(k + 1)))


def truncated_poisson(beta: float, cutoff: float = INF, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Law p_k proportional to exp(-beta k)/k! on 0 <= k <= cutoff.

    With an infinite cutoff this is Poisson with mean exp(-beta); the support
    is cut once the remaining tail falls below ``tail_tol``.
    """
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    _check_cutoff(cutoff)
    lam = math.exp(-beta)
    # the tail cut only matters when the cutoff sits well above the bulk
    wants_cut = tail_tol > 0 and (cutoff == INF or lam < cutoff)
    kcut, tail = _poisson_cut(lam, tail_tol) if wants_cut else (None, 0.0)
    if cutoff == INF:
        if tail_tol <= 0:
            raise ValueError("tail_tol must be positive for an infinite cutoff")
        k = np.arange(kcut + 1)
        probs = np.exp(k * -beta - special.gammaln(k + 1) - lam)
        return Pmf(probs, tail, GentileParams(beta, math.exp(-lam), -lam))

    cutoff = int(cutoff)
    if kcut is not None and kcut < cutoff:
        # exp(-beta k)/k! for k > kcut is negligible against the finite sum
        k = np.arange(kcut + 1)
        logw = k * -beta - special.gammaln(k + 1)
        lognorm = -(lam + math.log1p(-stats.poisson.sf(cutoff, lam)))
        probs = np.exp(logw + lognorm)
        trunc = tail / (1.0 - stats.poisson.sf(cutoff, lam))
        return Pmf(probs, trunc, GentileParams(beta, math.exp(lognorm), lognorm))
    k = np.arange(cutoff + 1)
    logw = k * -beta - special.gammaln(k + 1)
    lognorm = -float(special.logsumexp(logw))
    probs = np.exp(logw + lognorm)
    return Pmf(probs, 0.0, GentileParams(beta, math.exp(lognorm), lognorm))


def _log_partial_sum(logx: float, n: int) -> float:
    """log S_n with S_n = sum_{k=0}^{n} x^k / k!; -inf for n < 0."""
    if n < 0:
        return -INF
    if n <= 100_000:
        return _log_partial_exp(logx, n)
    lam = math.exp(logx)
    return lam + float(stats.poisson.logcdf(n, lam))


def _poisson_top_prob(beta: float, cutoff: int) -> float:
    """Truncated-Poisson probability of the top cell, N exp(-beta L)/L!."""
    return math.exp(-beta * cutoff - math.lgamma(cutoff + 1) - _log_partial_sum(-beta, cutoff))


def truncated_poisson_mean(beta: float, cutoff: float = INF) -> float:
    """Closed-form mean (1 - N exp(-beta L)/L!) exp(-beta).

    For a finite cutoff this is evaluated as exp(-beta) S_{L-1}/S_L, the same
    quantity written through partial exponential sums so it stays accurate
    when exp(-beta) is far above the cutoff.
    """
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    _check_cutoff(cutoff)
    if cutoff == INF:
        return math.exp(-beta)
    n = int(cutoff)
    return math.exp(-beta + _log_partial_sum(-beta, n - 1) - _log_partial_sum(-beta, n))


def truncated_poisson_variance(beta: float, cutoff: float = INF) -> float:
    """Variance of the truncated Poisson law; equals -d(mean)/d(beta)."""
    if cutoff == INF:
        return math.exp(-beta)
    n = int(cutoff)
    log_sn = _log_partial_sum(-beta, n)
    mean = math.exp(-beta + _log_partial_sum(-beta, n - 1) - log_sn)
    second_factorial = math.exp(-2 * beta + _log_partial_sum(-beta, n - 2) - log_sn) if n >= 2 else 0.0
    return max(second_factorial + mean - mean * mean, 0.0)


def truncated_geometric(beta_w: float, cutoff: float = INF, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Law p_k = N exp(-beta_w k) on 0 <= k <= cutoff.

    N = (1 - e^{-beta_w}) / (1 - e^{-(cutoff+1) beta_w}); the infinite cutoff is
    the bosonic geometric law and cutoff 1 the fermionic one.
    """
    if not math.isfinite(beta_w):
        raise ValueError(f"beta_w must be finite, got {beta_w}")
    _check_cutoff(cutoff)
    if cutoff == INF:
        if beta_w <= 0:
            raise ValueError("beta_w must be positive for an infinite cutoff")
        if tail_tol <= 0:
            raise ValueError("tail_tol must be positive for an infinite cutoff")
        # P(X > K) = exp(-(K+1) beta_w)
        kmax = max(0, math.ceil(-math.log(tail_tol) / beta_w) - 1)
        k = np.arange(kmax + 1)
        norm = -math.expm1(-beta_w)
        probs = norm * np.exp(-beta_w * k)
        return Pmf(probs, math.exp(-(kmax + 1) * beta_w), GentileParams(beta_w, norm))

    cutoff = int(cutoff)
    if beta_w > 0 and tail_tol > 0 and -math.log(tail_tol) / beta_w < cutoff:
        kmax = max(0, math.ceil(-math.log(tail_tol) / beta_w) - 1)
        if kmax < cutoff:
            k = np.arange(kmax + 1)
            norm = -math.expm1(-beta_w) / -math.expm1(-(cutoff + 1) * beta_w)
            probs = norm * np.exp(-beta_w * k)
            trunc = norm * (math.exp(-(kmax + 1) * beta_w) - math.exp(-(cutoff + 1) * beta_w)) / -math.expm1(-beta_w)
            return Pmf(probs, trunc, GentileParams(beta_w, norm))
    k = np.arange(cutoff + 1)
    logw = -beta_w * k
    lognorm = -float(special.logsumexp(logw))
    return Pmf(np.exp(logw + lognorm), 0.0, GentileParams(beta_w, math.exp(lognorm), lognorm))


def truncated_geometric_mean(beta_w: float, cutoff: float = INF) -> float:
    """Mean of the truncated geometric law.

    Evaluated as 1/(e^b - 1) - (L+1)/(e^{(L+1)b} - 1), an algebraic rewrite of
    [1 - (L+1)e^{-Lb} + L e^{-(L+1)b}] / [(e^b - 1)(1 - e^{-(L+1)b})] that keeps
    full precision for small |b| and for large L.
    """
    b = beta_w
    if not math.isfinite(b):
        raise ValueError(f"beta_w must be finite, got {b}")
    _check_cutoff(cutoff)
    if cutoff == INF:
        if b <= 0:
            raise ValueError("beta_w must be positive for an infinite cutoff")
        return 1.0 / math.expm1(b)
    n = int(cutoff) + 1
    if abs(b) * n < 1e-3:
        # cumulant series around the uniform law on 0..L
        return (n - 1) / 2 - b * (n * n - 1) / 12 + b**3 * (n**4 - 1) / 720
    return _inv_expm1(b) - n * _inv_expm1(n * b)


def truncated_geometric_variance(beta_w: float, cutoff: float = INF) -> float:
    """Variance of the truncated geometric law; equals -d(mean)/d(beta_w)."""
    b = beta_w
    if cutoff == INF:
        return math.exp(-b) / math.expm1(-b) ** 2
    n = int(cutoff) + 1
    if abs(b) * n < 1e-3:
        return (n * n - 1) / 12 - b * b * (n**4 - 1) / 240
    return _quarter_csch2(b) - n * n * _quarter_csch2(n * b)


def _inv_expm1(x: float) -> float:
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def _quarter_csch2(x: float) -> float:
    """e^x / (e^x - 1)^2 = 1 / (4 sinh^2(x/2))."""
    if abs(x) > 1400:
        return 0.0
    return 0.25 / math.sinh(0.5 * x) ** 2


def atomic_pmf(kind: AtomicKind | str, m: float, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Poisson, bosonic geometric, or fermionic two-point law of mean ``m``."""
    kind = AtomicKind(kind)
    if not m >= 0:
        raise ValueError(f"mean must be >= 0, got {m}")
    if kind is AtomicKind.FERMIONIC:
        if m > 1:
            raise ValueError(f"fermionic mean must be <= 1, got {m}")
        return Pmf(np.array([1.0 - m, m]))
    if m == 0:
        return delta_pmf(0)
    if kind is AtomicKind.POISSON:
        return truncated_poisson(-math.log(m), INF, tail_tol)
    return truncated_geometric(math.log1p(1.0 / m), INF, tail_tol)
