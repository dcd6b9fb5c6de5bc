"""Independent oracles: random allocation sampling and exact Omega maximization.

Sampling follows the counting measure of each wealth class: distinguishable
units pick owners independently, bosonic units form a uniform weak composition
(stars and bars), fermionic units a uniform subset of owners.
"""

from __future__ import annotations

import itertools
import math
import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import INF, Pmf, SpeciesSpec

__all__ = [
    "AllocationSample",
    "Enumeration",
    "RngStream",
    "SAMPLERS",
    "empirical_occupancy",
    "enumerate_extremum",
    "occupancy_counts",
    "occupancy_histogram",
    "omega",
    "sample_distinguishable",
    "sample_identical_bosonic",
    "sample_identical_fermionic",
    "sample_many",
]

MAX_ENUM_OWNERS = 12
MAX_ENUM_UNITS = 12
# bit generator pinned for reproducibility across builds
BIT_GENERATOR = np.random.PCG64


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream id; equal pairs give identical draws, distinct ids independent ones."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(BIT_GENERATOR(ss))


@dataclass(frozen=True, eq=False)
class AllocationSample:
    ownership: np.ndarray
    occupancy: np.ndarray  # occupancy[k] = number of owners holding k units

    @classmethod
    def from_ownership(cls, ownership) -> AllocationSample:
        own = np.asarray(ownership, dtype=np.int64)
        return cls(own, np.bincount(own, minlength=1))

    @property
    def owners(self) -> int:
        return int(self.ownership.size)

    @property
    def units(self) -> int:
        return int(self.ownership.sum())

    def conserves(self, units: int, owners: int) -> bool:
        k = np.arange(self.occupancy.size)
        return int(self.occupancy.sum()) == owners and int(np.dot(k, self.occupancy)) == units


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def sample_distinguishable(units: int, owners: int, rng) -> AllocationSample:
    """Every unit goes to an independently, uniformly chosen owner."""
    _check(units, owners)
    g = _rng(rng)
    picks = g.integers(0, owners, size=units)
    return AllocationSample.from_ownership(np.bincount(picks, minlength=owners))


def sample_identical_bosonic(units: int, owners: int, rng) -> AllocationSample:
    """Uniform weak composition of ``units`` into ``owners`` parts (stars and bars)."""
    _check(units, owners)
    g = _rng(rng)
    slots = units + owners - 1
    bars = np.sort(g.choice(slots, size=owners - 1, replace=False)) if owners > 1 else np.empty(0, np.int64)
    edges = np.concatenate(([-1], bars, [slots]))
    return AllocationSample.from_ownership(np.diff(edges) - 1)


def sample_identical_fermionic(units: int, owners: int, rng) -> AllocationSample:
    """A uniform ``units``-subset of owners holds one unit each."""
    _check(units, owners)
    if units > owners:
        raise ValueError(f"fermionic allocation needs units <= owners, got {units} > {owners}")
    g = _rng(rng)
    own = np.zeros(owners, dtype=np.int64)
    own[g.choice(owners, size=units, replace=False)] = 1
    return AllocationSample.from_ownership(own)


def _check(units: int, owners: int) -> None:
    if units < 0 or owners < 1:
        raise ValueError("need units >= 0 and owners >= 1")


SAMPLERS = {
    "distinguishable": sample_distinguishable,
    "bosonic": sample_identical_bosonic,
    "fermionic": sample_identical_fermionic,
}


def occupancy_histogram(samples: Iterable[AllocationSample]) -> tuple[np.ndarray, int, int]:
    """Summed integer occupancy, number of samples, and owners per sample."""
    total = np.zeros(1, dtype=np.int64)
    count = 0
    owners = None
    for s in samples:
        if owners is None:
            owners = s.owners
        elif s.owners != owners:
            raise ValueError(f"inconsistent owner counts {owners} and {s.owners}")
        if s.occupancy.size > total.size:
            total = np.pad(total, (0, s.occupancy.size - total.size))
        total[: s.occupancy.size] += s.occupancy
        count += 1
    if count == 0:
        raise ValueError("no samples")
    return total, count, owners


def empirical_occupancy(samples: Iterable[AllocationSample]) -> Pmf:
    """Average of n_k / N over samples."""
    total, count, owners = occupancy_histogram(samples)
    return Pmf(total / (count * owners))


def sample_many(
    kind: str,
    units: int,
    owners: int,
    n_samples: int,
    seed: int,
    *,
    chunk: int = 64,
    threads: int | None = None,
) -> tuple[np.ndarray, int]:
    """Summed occupancy over ``n_samples`` draws, split into fixed seeded streams.

    Chunk c always uses stream c, so the result does not depend on ``threads``
    (default: WEALTHSTAT_THREADS or 1).
    """
    sampler = SAMPLERS[kind]
    if threads is None:
        threads = int(os.environ.get("WEALTHSTAT_THREADS", "1") or 1)
    bounds = [(c, min(chunk, n_samples - c * chunk)) for c in range(math.ceil(n_samples / chunk))]

    def run(job):
        stream, n = job
        g = RngStream(seed, stream).generator()
        hist, _, _ = occupancy_histogram(sampler(units, owners, g) for _ in range(n))
        return hist

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hists = list(pool.map(run, bounds))
    else:
        hists = [run(b) for b in bounds]
    size = max(h.size for h in hists)
    total = np.zeros(size, dtype=np.int64)
    for h in hists:
        total[: h.size] += h
    return total, owners


# -- exact enumeration ------------------------------------------------------


Occupancy = tuple[tuple[tuple[int, ...], int], ...]


@dataclass(frozen=True)
class Enumeration:
    """All admissible occupancies with their exact counts Omega."""

    occupancies: tuple[tuple[Occupancy, int], ...]

    @property
    def total(self) -> int:
        return sum(w for _, w in self.occupancies)

    @property
    def best(self) -> int:
        return max(w for _, w in self.occupancies)

    @property
    def maximizers(self) -> list[Occupancy]:
        top = self.best
        return [occ for occ, w in self.occupancies if w == top]

    def omega_of(self, occupancy: dict) -> int:
        key = tuple(sorted(occupancy.items()))
        for occ, w in self.occupancies:
            if occ == key:
                return w
        raise KeyError(occupancy)


def omega(occupancy: dict[tuple[int, ...], int], species: Sequence[SpeciesSpec]) -> int:
    """Upsilon * Phi for an occupancy {ownership vector: number of owners}."""
    n_owners = sum(occupancy.values())
    upsilon = math.factorial(n_owners)
    for n in occupancy.values():
        upsilon //= math.factorial(n)
    phi = Fraction(1)
    for i, s in enumerate(species):
        if not s.distinguishable:
            continue
        units = sum(k[i] * n for k, n in occupancy.items())
        denom = 1
        for k, n in occupancy.items():
            denom *= math.factorial(k[i]) ** n
        phi *= Fraction(math.factorial(units), denom)
    assert phi.denominator == 1
    return upsilon * int(phi)


def enumerate_extremum(
    owners: int,
    species: Sequence[SpeciesSpec],
    counts: Sequence[int | None] | None = None,
    value_total: int | None = None,
) -> Enumeration:
    """Exhaustively enumerate occupancies meeting the constraints and count Omega.

    ``counts[i]`` fixes the total number of units of distinguishable species i;
    ``value_total`` fixes the summed value of the identical species.  Ties are
    kept: every occupancy with the largest Omega is a maximizer.
    """
    species = list(species)
    counts = list(counts) if counts is not None else [None] * len(species)
    if len(counts) != len(species):
        raise ValueError("counts must align with species")
    if owners < 1 or owners > MAX_ENUM_OWNERS:
        raise ValueError(f"instance too large: owners must be in 1..{MAX_ENUM_OWNERS}")
    identical = [i for i, s in enumerate(species) if not s.distinguishable]
    if identical and value_total is None:
        raise ValueError("identical species need value_total")
    budget = sum(c for c in counts if c) + (value_total or 0)
    if budget > MAX_ENUM_UNITS:
        raise ValueError(f"instance too large: at most {MAX_ENUM_UNITS} units")

    ranges = []
    for i, s in enumerate(species):
        if s.distinguishable:
            if counts[i] is None:
                raise ValueError(f"species {i}: distinguishable species need a fixed count")
            top = counts[i]
        else:
            top = value_total // s.weight
        if s.cutoff != INF:
            top = min(top, int(s.cutoff))
        ranges.append(range(top + 1))
    vectors = list(itertools.product(*ranges))

    def usage(vec):
        dist = tuple(vec[i] for i, s in enumerate(species) if s.distinguishable)
        val = sum(vec[i] * species[i].weight for i in identical)
        return dist, val

    uses = [usage(v) for v in vectors]
    target_dist = tuple(counts[i] for i, s in enumerate(species) if s.distinguishable)
    target_val = value_total or 0
    found: list[tuple[Occupancy, int]] = []

    def rec(idx, left, dist_left, val_left, chosen):
        if left == 0:
            if all(d == 0 for d in dist_left) and val_left == 0:
                occ = {vectors[j]: n for j, n in chosen}
                found.append((tuple(sorted(occ.items())), omega(occ, species)))
            return
        if idx == len(vectors):
            return
        dist, val = uses[idx]
        n = 0
        while n <= left:
            if n:
                rem = tuple(a - n * b for a, b in zip(dist_left, dist))
                if any(r < 0 for r in rem) or val_left - n * val < 0:
                    break
            else:
                rem = dist_left
            rec(idx + 1, left - n, rem, val_left - n * val, chosen + ([(idx, n)] if n else []))
            n += 1

    rec(0, owners, target_dist, target_val, [])
    if not found:
        raise ValueError("no occupancy satisfies the constraints")
    return Enumeration(tuple(found))


def occupancy_counts(occupancy: Occupancy, species_index: int = 0) -> np.ndarray:
    """Marginal n_k of one species from an occupancy."""
    top = max(k[species_index] for k, _ in occupancy)
    out = np.zeros(top + 1, dtype=np.int64)
    for k, n in occupancy:
        out[k[species_index]] += n
    return out
