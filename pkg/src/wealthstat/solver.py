"""Multiplier solvers for the count and value constraints.

Every constraint here is a strictly decreasing smooth function of its
multiplier, so a sign-change bracket plus bisection always converges; Newton
steps only polish the last digits.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

from .core import (
    INF,
    GentileParams,
    SpeciesSpec,
    truncated_geometric_mean,
    truncated_geometric_variance,
    truncated_poisson,
    truncated_poisson_mean,
    truncated_poisson_variance,
)

__all__ = [
    "NonConvergenceError",
    "WealthSystem",
    "bisect_decreasing",
    "expand_bracket",
    "identical_value_mean",
    "newton_polish",
    "solve_beta_distinguishable",
    "solve_betabar",
    "solve_system",
]

Func = Callable[[float], float]


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        if bracket is not None:
            message = f"{message} (final bracket [{bracket[0]!r}, {bracket[1]!r}])"
        super().__init__(message)
        self.bracket = bracket


def expand_bracket(
    g: Func,
    lo: float = 1e-12,
    hi: float = 1.0,
    *,
    allow_negative: bool = True,
    max_expansions: int = 200,
) -> tuple[float, float]:
    """Grow [lo, hi] by factors of 8 until a decreasing ``g`` changes sign.

    Returns (lo, hi) with g(lo) >= 0 >= g(hi).
    """
    for _ in range(max_expansions):
        if g(hi) <= 0:
            break
        lo, hi = hi, hi * 8
    else:
        raise NonConvergenceError("no sign change above", (lo, hi))
    for _ in range(max_expansions):
        glo = g(lo)
        if glo >= 0:
            return lo, hi
        if allow_negative:
            hi, lo = lo, lo - 8 * (hi - lo)
        else:
            if lo <= 1e-300:
                raise NonConvergenceError("no sign change in the positive domain", (lo, hi))
            hi, lo = lo, lo / 8
    raise NonConvergenceError("no sign change below", (lo, hi))


def bisect_decreasing(g: Func, lo: float, hi: float, *, xtol: float = 0.0, max_iter: int = 2000) -> float:
    """Bisection for a decreasing ``g`` with g(lo) >= 0 >= g(hi).

    Runs until the bracket cannot shrink in floating point (or below ``xtol``).
    """
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            return mid
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    raise NonConvergenceError("bisection iteration limit", (lo, hi))


def newton_polish(
    g: Func, dg: Func, x0: float, lo: float, hi: float, *, rtol: float = 1e-15, max_iter: int = 100
) -> float:
    """Newton iteration kept inside [lo, hi]; falls back to bisection steps."""
    x = x0
    prev_step = math.inf
    for _ in range(max_iter):
        gx = g(x)
        if gx == 0:
            return x
        if gx > 0:
            lo = max(lo, x)
        else:
            hi = min(hi, x)
        d = dg(x)
        step = gx / d if d != 0 else 0.0
        xn = x - step
        # a step that leaves the bracket or fails to halve the last one bisects instead
        if not (lo <= xn <= hi) or d == 0 or abs(step) > 0.5 * prev_step:
            xn = 0.5 * (lo + hi)
        prev_step = abs(xn - x)
        if abs(xn - x) <= rtol * max(abs(x), 1e-300):
            return xn
        if hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
            return 0.5 * (lo + hi)
        x = xn
    raise NonConvergenceError("Newton iteration limit", (lo, hi))


def _root(g: Func, dg: Func | None, lo: float, hi: float, *, allow_negative: bool) -> float:
    lo, hi = expand_bracket(g, lo, hi, allow_negative=allow_negative)
    # coarse bisection then polish
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-6 * max(abs(mid), 1e-12):
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    if dg is None:
        return bisect_decreasing(g, lo, hi)
    try:
        return newton_polish(g, dg, 0.5 * (lo + hi), lo, hi)
    except NonConvergenceError:
        return bisect_decreasing(g, lo, hi)


def solve_beta_distinguishable(m: float, cutoff: float = INF) -> GentileParams:
    """Multiplier beta with truncated_poisson_mean(beta, cutoff) == m."""
    if not m > 0:
        raise ValueError(f"mean must be positive, got {m}")
    if cutoff == INF:
        beta = -math.log(m)
        return GentileParams(beta, math.exp(-m), -m)
    if not m < cutoff:
        raise ValueError(f"mean {m} not attainable with cutoff {cutoff}: need 0 < m < cutoff")

    def g(b):
        return truncated_poisson_mean(b, cutoff) - m

    def dg(b):
        return -truncated_poisson_variance(b, cutoff)

    beta = _root(g, dg, 1e-12, 1.0, allow_negative=True)
    return truncated_poisson(beta, cutoff).params


def identical_value_mean(
    betabar: float, species: Sequence[tuple[int, float]], ladder: int = 0
) -> float:
    """Mean total value sum_w w * mean(betabar * w) over identical species.

    ``ladder`` adds the bosonic denominations w = 1..ladder (a satoshi-style
    family) through the term-size-truncated sum of the bitcoin module.
    """
    total = 0.0
    for w, cutoff in species:
        total += w * truncated_geometric_mean(betabar * w, cutoff)
    if ladder:
        from .bitcoin import total_value_mean

        total += total_value_mean(betabar, ladder)
    return total


def _identical_value_slope(betabar: float, species: Sequence[tuple[int, float]], ladder: int = 0) -> float:
    total = 0.0
    for w, cutoff in species:
        total -= w * w * truncated_geometric_variance(betabar * w, cutoff)
    if ladder:
        from .bitcoin import total_value_mean_derivative

        total += total_value_mean_derivative(betabar, ladder)
    return total


def solve_betabar(species: Sequence[tuple[int, float]], mean_value: float, ladder: int = 0) -> GentileParams:
    """Shared multiplier of all identical species from the mean total value.

    ``species`` is a sequence of (weight, cutoff).  The returned ``norm`` is
    the normalization of the first species (or of the ladder's first rung).
    """
    species = [(int(w), c) for w, c in species]
    if not species and not ladder:
        raise ValueError("at least one identical species is required")
    if not mean_value > 0:
        raise ValueError(f"mean total value must be positive, got {mean_value}")
    bounded = not ladder and all(c != INF for _, c in species)
    if bounded:
        sup = sum(w * c for w, c in species)
        if not mean_value < sup:
            raise ValueError(f"mean total value {mean_value} exceeds the attainable supremum {sup}")

    def g(b):
        return identical_value_mean(b, species, ladder) - mean_value

    def dg(b):
        return _identical_value_slope(b, species, ladder)

    lo, hi = 1e-12, 1.0
    if ladder:
        # the ladder sum alone is ~pi^2/(6 b^2); start near its root
        guess = math.pi / math.sqrt(6.0 * mean_value)
        lo, hi = guess / 2, guess * 2
    betabar = _root(g, dg, lo, hi, allow_negative=bounded)
    w0, c0 = species[0] if species else (1, INF)
    log_norm = _log_geometric_norm(betabar * w0, c0)
    return GentileParams(betabar, math.exp(log_norm), log_norm)


def _log_geometric_norm(b: float, cutoff: float) -> float:
    """log of (1 - e^{-b}) / (1 - e^{-(cutoff+1) b})."""
    if cutoff == INF:
        return math.log(-math.expm1(-b))
    n = int(cutoff) + 1
    if b == 0:
        return -math.log(n)
    if b > 0:
        return math.log(-math.expm1(-b)) - math.log(-math.expm1(-n * b))
    # negative b: the ratio is expm1(a)/expm1(n a) with a = -b
    return _log_expm1(-b) - _log_expm1(-n * b)


def _log_expm1(x: float) -> float:
    """log(e^x - 1) for x > 0 without overflow."""
    return x + math.log(-math.expm1(-x))


@dataclass(frozen=True)
class WealthSystem:
    """Species plus (after solving) their multipliers.

    ``mean_value`` is the mean per-owner value of the identical sector only.
    ``ladder`` > 0 appends the bosonic denominations w = 1..ladder.
    """

    species: tuple[SpeciesSpec, ...]
    mean_value: float | None = None
    ladder: int = 0
    betas: tuple[float | None, ...] | None = field(default=None)
    betabar: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        if not self.species and not self.ladder:
            raise ValueError("a wealth system needs at least one species")
        if self.has_identical and self.mean_value is None:
            raise ValueError("identical species require mean_value")
        for i, s in enumerate(self.species):
            if s.distinguishable and s.mean is None:
                raise ValueError(f"species {i}: distinguishable species need a target mean")

    @property
    def identical(self) -> list[tuple[int, float]]:
        return [(s.weight, s.cutoff) for s in self.species if not s.distinguishable]

    @property
    def has_identical(self) -> bool:
        return bool(self.ladder) or any(not s.distinguishable for s in self.species)

    @property
    def solved(self) -> bool:
        return self.betas is not None

    def species_mean(self, index: int) -> float:
        """Mean possession count of species ``index`` under the solved multipliers."""
        s = self.species[index]
        if s.distinguishable:
            return truncated_poisson_mean(self.betas[index], s.cutoff)
        return truncated_geometric_mean(self.betabar * s.weight, s.cutoff)

    def total_value_mean(self) -> float:
        """Mean total value over every species: sum w_i m_i + mean_value."""
        dist = sum(s.weight * s.mean for s in self.species if s.distinguishable)
        return dist + (self.mean_value if self.has_identical else 0.0)


def solve_system(system: WealthSystem) -> WealthSystem:
    """Attach every multiplier; raises with the offending species index."""
    betas: list[float | None] = []
    for i, s in enumerate(system.species):
        if not s.distinguishable:
            betas.append(None)
            continue
        try:
            if s.mean == 0:
                raise ValueError("a zero mean has no finite multiplier")
            betas.append(solve_beta_distinguishable(s.mean, s.cutoff).beta)
        except (ValueError, NonConvergenceError) as exc:
            raise type(exc)(f"species {i}: {exc}") from exc
    betabar = None
    if system.has_identical:
        try:
            betabar = solve_betabar(system.identical, system.mean_value, system.ladder).beta
        except (ValueError, NonConvergenceError) as exc:
            raise type(exc)(f"identical sector: {exc}") from exc
    return replace(system, betas=tuple(betas), betabar=betabar)
