"""Lorenz curves, Gini coefficients, entropies and tail masses."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .core import AtomicKind, Pmf

__all__ = [
    "LorenzCurve",
    "entropy_bosonic",
    "entropy_poisson_asymptotic",
    "gini_bosonic",
    "gini_bosonic_lorenz",
    "gini_fermionic",
    "gini_from_pmf",
    "gini_poisson",
    "lorenz_from_pmf",
    "lorenz_geometric_analytic",
    "lorenz_poisson_continuous",
    "pareto_8020_mean",
    "shannon_entropy",
    "tail_mass_above_mean",
]

GINI_TRUNCATION_LIMIT = 1e-9


@dataclass(frozen=True, eq=False)
class LorenzCurve:
    x: np.ndarray
    y: np.ndarray
    gini: float

    def __post_init__(self):
        for name in ("x", "y"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def area(self) -> float:
        return float(np.trapezoid(self.y, self.x))

    def __call__(self, x):
        return np.interp(x, self.x, self.y)


def lorenz_from_pmf(pmf: Pmf) -> LorenzCurve:
    """Piecewise-linear Lorenz curve through the k-indexed cumulative shares.

    The curve starts with the flat segment 0 <= x <= P(0) at y = 0.  Shares
    are taken relative to the represented mass so the curve ends at (1, 1).
    """
    p = pmf.probs
    k = np.arange(p.size)
    total = p.sum()
    wealth = np.dot(k, p)
    if not wealth > 0:
        raise ValueError("Lorenz curve needs a positive mean")
    x = np.concatenate(([0.0], np.cumsum(p) / total))
    y = np.concatenate(([0.0], np.cumsum(k * p) / wealth))
    x[-1] = y[-1] = 1.0
    keep = np.ones(x.size, dtype=bool)
    keep[1:] = (np.diff(x) > 0) | (np.diff(y) > 0)
    x, y = x[keep], y[keep]
    gini = 1.0 - 2.0 * float(np.trapezoid(y, x))
    return LorenzCurve(x, y, min(max(gini, 0.0), 1.0))


def lorenz_geometric_analytic(m: float, x):
    """Lorenz curve of the bosonic geometric law with k treated as continuous.

    y = x + (1-x) ln(1-x) / (m ln(1 + 1/m)) above x = 1/(m+1), zero below;
    x = 1 returns 1 (the continuous limit of the logarithmic singularity).
    """
    if not m > 0:
        raise ValueError(f"mean must be positive, got {m}")
    xs = np.asarray(x, dtype=float)
    if np.any((xs < 0) | (xs > 1)):
        raise ValueError("x must lie in [0, 1]")
    scale = m * math.log1p(1.0 / m)
    curve = xs + special.xlogy(1.0 - xs, 1.0 - xs) / scale
    y = np.where(xs <= 1.0 / (m + 1.0), 0.0, curve)
    return float(y) if np.ndim(x) == 0 else y


def lorenz_poisson_continuous(m: float, x: float) -> float:
    """Poisson Lorenz curve with k continued through incomplete gamma functions.

    Cumulative shares x(k) = Q(k+1, m), y(k) = Q(k, m) for real k >= 0, the
    same continuation in k that produces the analytic geometric curve.
    """
    if not m > 0:
        raise ValueError(f"mean must be positive, got {m}")
    if x <= math.exp(-m):
        return 0.0
    if x >= 1.0:
        return 1.0
    hi = m + 50.0 * math.sqrt(m) + 50.0
    k = optimize.brentq(lambda k: special.gammaincc(k + 1, m) - x, 0.0, hi, xtol=1e-14, rtol=1e-14)
    return float(special.gammaincc(k, m)) if k > 0 else 0.0


def gini_from_pmf(pmf: Pmf) -> float:
    """Gini coefficient via the single-pass form of the double sum.

    G = 1 + (1/m) sum_k P(k) [k P(k) - 2 sum_{k'<=k} k' P(k')].
    """
    if pmf.truncation_mass >= GINI_TRUNCATION_LIMIT:
        raise ValueError(f"truncation_mass {pmf.truncation_mass} too large for a Gini value")
    p = pmf.probs
    k = np.arange(p.size)
    kp = k * p
    m = kp.sum()
    if not m > 0:
        raise ValueError("Gini coefficient needs a positive mean")
    g = 1.0 + float(np.dot(p, kp - 2.0 * np.cumsum(kp))) / m
    return min(max(g, 0.0), 1.0)


def _simpson(f, a: float, b: float, n: int) -> float:
    x = np.linspace(a, b, n + 1)
    fx = f(x)
    h = (b - a) / n
    return h / 3.0 * (fx[0] + fx[-1] + 4.0 * fx[1:-1:2].sum() + 2.0 * fx[2:-1:2].sum())


def gini_poisson(m: float, tol: float = 1e-9) -> float:
    """(1/pi) int_0^pi exp(-2m(1 - cos t)) (1 + cos t) dt by refined Simpson."""
    if not m >= 0:
        raise ValueError(f"mean must be >= 0, got {m}")

    def f(t):
        return np.exp(-2.0 * m * (1.0 - np.cos(t))) * (1.0 + np.cos(t))

    n = 16
    prev = _simpson(f, 0.0, math.pi, n)
    while True:
        n *= 2
        cur = _simpson(f, 0.0, math.pi, n)
        rich = cur + (cur - prev) / 15.0
        if abs(cur - prev) < tol or n > 1 << 22:
            return rich / math.pi
        prev = cur


def gini_bosonic(m: float) -> float:
    if not m >= 0:
        raise ValueError(f"mean must be >= 0, got {m}")
    return (1.0 + m) / (1.0 + 2.0 * m)


def gini_fermionic(m: float) -> float:
    if not 0 <= m <= 1:
        raise ValueError(f"fermionic mean must lie in [0, 1], got {m}")
    return 1.0 - m


def gini_bosonic_lorenz(m: float) -> float:
    """Gini from integrating the analytic geometric Lorenz curve.

    (m/(m+1))^2 (1/(2m ln(1+1/m)) + 1/m + 1/m^2); within 2.4% of the closed form.
    """
    if not m >= 0:
        raise ValueError(f"mean must be >= 0, got {m}")
    if m == 0:
        return 1.0
    return (m / (m + 1.0)) ** 2 * (1.0 / (2.0 * m * math.log1p(1.0 / m)) + 1.0 / m + 1.0 / m**2)


def shannon_entropy(pmf: Pmf) -> float:
    p = pmf.probs[pmf.probs > 0]
    return float(-np.dot(p, np.log(p)))


def entropy_bosonic(m: float) -> float:
    """(m+1) ln(m+1) - m ln m, the maximal entropy at mean m."""
    if m == 0:
        return 0.0
    return (m + 1.0) * math.log1p(m) - m * math.log(m)


def entropy_poisson_asymptotic(m: float) -> float:
    """Large-m expansion (1/2) ln(2 pi e m) - 1/(12 m)."""
    if not m > 0:
        raise ValueError(f"mean must be positive, got {m}")
    return 0.5 * math.log(2.0 * math.pi * math.e * m) - 1.0 / (12.0 * m)


def tail_mass_above_mean(kind: AtomicKind | str, m: float) -> float:
    """Probability of holding more than the mean, sum over k >= floor(m) + 1."""
    kind = AtomicKind(kind)
    if not m > 0:
        raise ValueError(f"mean must be positive, got {m}")
    first = math.floor(m) + 1
    if kind is AtomicKind.POISSON:
        # P(X >= n) = regularized lower incomplete gamma P(n, m)
        return float(special.gammainc(first, m))
    if kind is AtomicKind.BOSONIC:
        return (m / (1.0 + m)) ** first
    raise ValueError("tail mass comparison is defined for poisson and bosonic laws")


def pareto_8020_mean(kind: AtomicKind | str, x: float = 0.8, y: float = 0.2) -> float:
    """Mean m at which the smooth Lorenz curve passes through (x, y)."""
    kind = AtomicKind(kind)
    if kind is AtomicKind.POISSON:
        def g(m):
            return lorenz_poisson_continuous(m, x) - y
    elif kind is AtomicKind.BOSONIC:
        def g(m):
            return lorenz_geometric_analytic(m, x) - y
    else:
        raise ValueError("80/20 root is defined for poisson and bosonic laws")
    return float(optimize.brentq(g, 1e-3, 50.0, xtol=1e-13, rtol=1e-13))
