import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wealthstat import SpeciesSpec, atomic_pmf, total_variation
from wealthstat.convolve import fermionic_binomial
from wealthstat.core import Pmf
from wealthstat.mc import (
    AllocationSample,
    RngStream,
    empirical_occupancy,
    enumerate_extremum,
    occupancy_counts,
    omega,
    sample_distinguishable,
    sample_identical_bosonic,
    sample_identical_fermionic,
    sample_many,
)


def test_stream_determinism():
    a = sample_identical_bosonic(50, 20, RngStream(7, 3))
    b = sample_identical_bosonic(50, 20, RngStream(7, 3))
    c = sample_identical_bosonic(50, 20, RngStream(7, 4))
    assert a.ownership.tobytes() == b.ownership.tobytes()
    assert a.ownership.tobytes() != c.ownership.tobytes()


def test_sample_many_independent_of_threads():
    h1, _ = sample_many("distinguishable", 40, 30, 300, seed=5, chunk=16, threads=1)
    h4, _ = sample_many("distinguishable", 40, 30, 300, seed=5, chunk=16, threads=4)
    np.testing.assert_array_equal(h1, h4)


@given(st.integers(0, 60), st.integers(1, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=60)
def test_conservation(units, owners, seed):
    g = RngStream(seed).generator()
    for sampler in (sample_distinguishable, sample_identical_bosonic):
        s = sampler(units, owners, g)
        assert s.conserves(units, owners)
        assert s.units == units and s.owners == owners
    if units <= owners:
        assert sample_identical_fermionic(units, owners, g).conserves(units, owners)


def _outcome_frequencies(sampler, units, owners, n, seed):
    g = RngStream(seed).generator()
    counts = {}
    for _ in range(n):
        key = tuple(sampler(units, owners, g).ownership.tolist())
        counts[key] = counts.get(key, 0) + 1
    return {k: v / n for k, v in counts.items()}


def test_intro_outcome_measures():
    dist = _outcome_frequencies(sample_distinguishable, 2, 2, 40000, 1)
    # four equiprobable coin assignments: (1,1) arises twice
    assert dist[(1, 1)] == pytest.approx(0.5, abs=0.01)
    assert dist[(2, 0)] == pytest.approx(0.25, abs=0.01)
    ident = _outcome_frequencies(sample_identical_bosonic, 2, 2, 30000, 2)
    assert sorted(ident) == [(0, 2), (1, 1), (2, 0)]
    assert all(v == pytest.approx(1 / 3, abs=0.01) for v in ident.values())


def test_trivial_samples():
    g = RngStream(0).generator()
    assert sample_distinguishable(0, 5, g).ownership.tolist() == [0] * 5
    assert sample_identical_fermionic(4, 4, g).ownership.tolist() == [1] * 4
    with pytest.raises(ValueError):
        sample_identical_fermionic(5, 4, g)
    with pytest.raises(ValueError):
        sample_distinguishable(1, 0, g)
    hits = np.zeros(3)
    for _ in range(6000):
        hits += sample_identical_bosonic(1, 3, g).ownership
    np.testing.assert_allclose(hits / 6000, 1 / 3, atol=0.02)
    hits = np.zeros(4)
    for _ in range(8000):
        hits += sample_identical_fermionic(1, 4, g).ownership
    np.testing.assert_allclose(hits / 8000, 1 / 4, atol=0.02)


def test_fermionic_occupancy_is_exact():
    hist, owners = sample_many("fermionic", 300, 1000, 10**4, seed=3)
    assert hist[1] / (10**4 * owners) == pytest.approx(0.30, abs=0.01)


def test_empirical_occupancy_examples():
    one = AllocationSample.from_ownership([2, 0])
    np.testing.assert_allclose(empirical_occupancy([one]).probs, [0.5, 0, 0.5])
    two = AllocationSample.from_ownership([1, 1])
    np.testing.assert_allclose(empirical_occupancy([one, two]).probs, [0.25, 0.5, 0.25])
    with pytest.raises(ValueError):
        empirical_occupancy([one, AllocationSample.from_ownership([1, 1, 0])])
    with pytest.raises(ValueError):
        empirical_occupancy([])


@pytest.mark.parametrize("kind,law", [("distinguishable", "poisson"), ("bosonic", "bosonic")])
def test_large_scale_marginals(kind, law):
    n = 10**5
    hist, owners = sample_many(kind, n, n, 1000, seed=99)
    assert total_variation(Pmf(hist / (1000 * owners)), atomic_pmf(law, 1.0)) < 0.01


def _bosonic_finite_marginal(units, owners):
    # exact single-owner law of a uniform weak composition
    from math import comb

    k = np.arange(units + 1)
    return np.array([comb(units - j + owners - 2, owners - 2) for j in k]) / comb(units + owners - 1, owners - 1)


@pytest.mark.parametrize("kind", ["distinguishable", "bosonic"])
def test_convergence_rate(kind):
    units, owners = 20, 10
    exact = fermionic_binomial(units, owners).probs if kind == "distinguishable" else _bosonic_finite_marginal(units, owners)
    tv = {}
    for n in (10**2, 10**3, 10**4):
        vals = []
        for rep in range(5):
            hist, _ = sample_many(kind, units, owners, n, seed=1000 + rep)
            vals.append(total_variation(hist / (n * owners), exact))
        tv[n] = float(np.mean(vals))
    assert tv[10**2] > tv[10**3] > tv[10**4]
    # a 100-fold sample increase should cut the error roughly 10-fold
    assert 4 < tv[10**2] / tv[10**4] < 25


def test_intro_enumeration():
    dist = enumerate_extremum(2, [SpeciesSpec("distinguishable")], [2])
    assert dist.omega_of({(1,): 2}) == 2
    assert dist.omega_of({(0,): 1, (2,): 1}) == 2
    assert dist.total == 4 and len(dist.maximizers) == 2
    ident = enumerate_extremum(2, [SpeciesSpec("identical")], None, 2)
    assert ident.omega_of({(0,): 1, (2,): 1}) == 2
    assert ident.omega_of({(1,): 2}) == 1
    assert ident.maximizers == [(((0,), 1), ((2,), 1))]


def test_enumeration_guard():
    with pytest.raises(ValueError, match="too large"):
        enumerate_extremum(13, [SpeciesSpec("distinguishable")], [2])
    with pytest.raises(ValueError, match="too large"):
        enumerate_extremum(4, [SpeciesSpec("distinguishable")], [13])


def test_omega_two_species():
    # one coin species and one deposit species over two owners
    species = [SpeciesSpec("distinguishable"), SpeciesSpec("identical")]
    assert omega({(1, 0): 1, (0, 1): 1}, species) == 2
    # two coins split across owners: 2 owner orderings times 2 coin assignments
    assert omega({(1, 0): 1, (1, 1): 1}, species) == 4
    assert omega({(2, 0): 1, (0, 1): 1}, species) == 2
    e = enumerate_extremum(2, species, [2, None], 1)
    assert e.maximizers == [(((1, 0), 1), ((1, 1), 1))]
    assert e.total == sum(w for _, w in e.occupancies)


def test_enumeration_total_matches_direct_count():
    # distinguishable: N^M assignments; bosonic: C(M+N-1, N-1) compositions
    from math import comb

    for n_own, units in ((3, 4), (4, 3), (5, 5)):
        assert enumerate_extremum(n_own, [SpeciesSpec("distinguishable")], [units]).total == n_own**units
        assert enumerate_extremum(n_own, [SpeciesSpec("identical")], None, units).total == comb(units + n_own - 1, n_own - 1)


def _mode_set(values) -> set[int]:
    values = np.asarray(values, dtype=float)
    return set(np.flatnonzero(values >= values.max() * (1 - 1e-12)).tolist())


def _maximizer_agrees(n_own, units, kind) -> bool:
    if kind == "distinguishable":
        e = enumerate_extremum(n_own, [SpeciesSpec("distinguishable")], [units])
        law = "poisson"
    else:
        e = enumerate_extremum(n_own, [SpeciesSpec("identical")], None, units)
        law = "bosonic"
    pred = n_own * atomic_pmf(law, units / n_own, 1e-15).probs
    for occ in e.maximizers:
        counts = occupancy_counts(occ)
        if not _mode_set(counts) & _mode_set(pred):
            return False
        size = max(len(counts), len(pred))
        c = np.pad(counts, (0, size - len(counts)))
        p = np.pad(pred, (0, size - len(pred)))
        for got, want in zip(c, p):
            if abs(want - round(want)) < 1e-9:
                if got != round(want):
                    return False
            elif abs(got - want) > 1:
                return False
    return True


def test_mode_at_mean_for_eight_owners():
    e = enumerate_extremum(8, [SpeciesSpec("distinguishable")], [8])
    assert [occupancy_counts(o).tolist() for o in e.maximizers] == [[2, 4, 2]]
    assert int(np.argmax(occupancy_counts(e.maximizers[0]))) == 1


AGREEING = [
    (12, 12, "distinguishable"),
    (11, 11, "distinguishable"),
    (12, 8, "distinguishable"),
    (12, 6, "distinguishable"),
    (12, 3, "distinguishable"),
    (10, 5, "distinguishable"),
    (12, 8, "bosonic"),
    (12, 4, "bosonic"),
    (12, 2, "bosonic"),
    (10, 5, "bosonic"),
    (9, 9, "bosonic"),
]


@pytest.mark.parametrize("n_own,units,kind", AGREEING)
def test_oracle_agreement(n_own, units, kind):
    assert _maximizer_agrees(n_own, units, kind)


@pytest.mark.xfail(strict=True, reason="finite-N maximizers deviate from N*P_k on many instances with N <= 12")
def test_oracle_agreement_on_every_enumerable_instance():
    assert all(
        _maximizer_agrees(n_own, units, kind)
        for n_own in range(2, 13)
        for units in range(1, 13)
        for kind in ("distinguishable", "bosonic")
    )
