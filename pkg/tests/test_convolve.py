import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wealthstat import INF, SpeciesSpec, WealthSystem, atomic_pmf, solve_system, total_variation
from wealthstat.convolve import (
    bank_convolution,
    bank_generating_function,
    fermionic_binomial,
    generating_function,
    net_balance,
    net_balance_single_bank,
    poisson_additivity_check,
    poisson_geometric_convolve,
    poisson_geometric_tail,
    system_parts,
    weighted_convolve,
)
from wealthstat.core import Pmf, delta_pmf
from wealthstat.inequality import gini_from_pmf


def brute_force_value(parts, v_max):
    """Sum of prod P(k_I) over every k with w.k <= v_max, by explicit enumeration."""
    out = np.zeros(v_max + 1)
    ranges = [range(min(len(p), v_max // w + 1)) for p, w in parts]
    for ks in itertools.product(*ranges):
        v = sum(k * w for k, (_, w) in zip(ks, parts))
        if v <= v_max:
            out[v] += math.prod(p.probs[k] for k, (p, _) in zip(ks, parts))
    return out


def test_weighted_examples():
    np.testing.assert_array_equal(weighted_convolve([(delta_pmf(1), 5)]).probs, [0, 0, 0, 0, 0, 1])
    f = atomic_pmf("fermionic", 0.5)
    np.testing.assert_allclose(weighted_convolve([(f, 1), (f, 1)]).probs, [0.25, 0.5, 0.25], atol=1e-15)
    p = atomic_pmf("poisson", 1.0)
    assert weighted_convolve([(p, 1), (p, 2)]).probs[0] == pytest.approx(math.exp(-2), rel=1e-13)


def test_weighted_rejects_bad_weight():
    with pytest.raises(ValueError):
        weighted_convolve([(delta_pmf(1), 0)])


def test_weighted_convolve_matches_enumeration():
    parts = [
        (atomic_pmf("poisson", 0.8), 1),
        (atomic_pmf("bosonic", 0.6), 2),
        (atomic_pmf("fermionic", 0.3), 3),
        (atomic_pmf("poisson", 1.3), 5),
    ]
    got = weighted_convolve(parts, 12).probs
    np.testing.assert_allclose(got, brute_force_value(parts, 12), atol=1e-12)


def test_closed_forms_match_enumeration():
    geom = atomic_pmf("bosonic", 1.5)
    pois = atomic_pmf("poisson", 0.7)
    nb = brute_force_value([(geom, 1)] * 3, 12)
    np.testing.assert_allclose(nb_law(4.5, 3, 12), nb, atol=1e-12)
    np.testing.assert_allclose(bank_convolution(4.5, 3).probs[:13], nb, atol=1e-12)
    pg = brute_force_value([(pois, 1), (geom, 1)], 12)
    np.testing.assert_allclose(poisson_geometric_convolve(0.7, 1.5).probs[:13], pg, atol=1e-12)
    f = atomic_pmf("fermionic", 1 / 4)
    np.testing.assert_allclose(fermionic_binomial(5, 4).probs, brute_force_value([(f, 1)] * 5, 5), atol=1e-12)
    pp = brute_force_value([(atomic_pmf("poisson", 0.4), 1), (atomic_pmf("poisson", 1.1), 1)], 12)
    np.testing.assert_allclose(poisson_additivity_check(0.4, 1.1).probs[:13], pp, atol=1e-12)


def nb_law(m, d, k_max):
    k = np.arange(k_max + 1)
    return np.array([math.comb(d + j - 1, j) for j in k]) * (d / (m + d)) ** d * (m / (m + d)) ** k


def test_net_balance_matches_enumeration():
    g1, g2 = atomic_pmf("bosonic", 0.9), atomic_pmf("bosonic", 1.4)
    sp = net_balance(0.9, 1.4)
    for a in range(-6, 7):
        brute = sum(g1.probs[i] * g2.probs[i - a] for i in range(max(a, 0), len(g1)) if i - a < len(g2))
        assert sp.at(a) == pytest.approx(brute, abs=1e-12)


def test_generating_function_examples():
    s = solve_system(WealthSystem([SpeciesSpec("distinguishable", mean=1.0)]))
    assert generating_function(s, 0.0) == pytest.approx(math.exp(-1), rel=1e-15)
    b = solve_system(WealthSystem([SpeciesSpec("identical")], 1.0))
    assert generating_function(b, 0.5) == pytest.approx(2 / 3, rel=1e-14)
    assert generating_function(b, 1.0) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        generating_function(b, 1.5)


def _system(draw_seed: int) -> WealthSystem:
    rng = np.random.default_rng(draw_seed)
    species = [
        SpeciesSpec(
            "distinguishable",
            int(rng.integers(1, 4)),
            INF if rng.random() < 0.5 else int(rng.integers(1, 6)),
            float(rng.uniform(0.1, 0.9)),
        )
        for _ in range(int(rng.integers(0, 3)))
    ]
    ident = [
        SpeciesSpec("identical", int(rng.integers(1, 4)), INF if rng.random() < 0.5 else int(rng.integers(1, 5)))
        for _ in range(int(rng.integers(1, 3)))
    ]
    sup = sum(s.weight * s.cutoff for s in ident)
    mean_value = float(rng.uniform(0.3, 2.0)) if sup == INF else float(rng.uniform(0.1, 0.9) * sup)
    return solve_system(WealthSystem(species + ident, mean_value))


@given(st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_generating_function_duality(seed):
    system = _system(seed)
    parts = system_parts(system, 1e-15)
    pmf = weighted_convolve(parts, sum((len(p) - 1) * w for p, w in parts))
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert pmf.generating(q) == pytest.approx(generating_function(system, q), abs=1e-9)


@given(st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_mean_additivity_and_derivative(seed):
    system = _system(seed)
    parts = system_parts(system, 1e-15)
    # full represented support, so no mass is cut at the default mean + 20 sd
    pmf = weighted_convolve(parts, sum((len(p) - 1) * w for p, w in parts))
    expected = system.total_value_mean()
    assert pmf.mean == pytest.approx(expected, rel=1e-9)
    h = 1e-5
    slope = (generating_function(system, 1.0) - generating_function(system, 1.0 - h)) / h
    # one-sided difference at the boundary; second order term is O(h)
    assert slope == pytest.approx(expected, rel=1e-3)


def test_bank_examples():
    np.testing.assert_allclose(bank_convolution(1.7, 1).probs, atomic_pmf("bosonic", 1.7).probs, rtol=1e-12)
    assert bank_convolution(2.0, 2).probs[0] == pytest.approx(0.25, rel=1e-14)
    tv = [total_variation(bank_convolution(4.0, d), atomic_pmf("poisson", 4.0)) for d in (64, 4096)]
    assert tv[1] < tv[0] and tv[1] < 1e-2


@pytest.mark.parametrize("q", [0.0, 0.3, 0.7, 1.0])
def test_bank_generating_function(q):
    pmf = bank_convolution(3.0, 5)
    assert np.polynomial.polynomial.polyval(q, pmf.probs) == pytest.approx(bank_generating_function(3.0, 5, q), abs=1e-11)


def test_bank_gini_non_increasing():
    for m in (0.5, 4.0, 20.0):
        g = [gini_from_pmf(bank_convolution(m, d)) for d in (1, 2, 3, 5, 8, 16, 64, 512)]
        assert all(b <= a + 1e-12 for a, b in zip(g, g[1:]))


@pytest.mark.parametrize("m", [50.0, 73.5, 200.0])
@pytest.mark.parametrize("d", [2, 3, 8, 17, 64])
def test_bank_mode_law(m, d):
    mode = int(np.argmax(bank_convolution(m, d).probs))
    assert abs(mode - (1 - 1 / d) * m) <= 1


def test_fermionic_binomial_examples():
    np.testing.assert_allclose(fermionic_binomial(1, 2).probs, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(fermionic_binomial(2, 2).probs, [0.25, 0.5, 0.25], atol=1e-15)
    assert total_variation(fermionic_binomial(4096, 4096), atomic_pmf("poisson", 1.0)) < 5e-4


def test_fermionic_binomial_approaches_poisson():
    tv = [total_variation(fermionic_binomial(n, n), atomic_pmf("poisson", 1.0)) for n in (4, 16, 64, 256, 1024)]
    assert all(b < a for a, b in zip(tv, tv[1:]))


def test_poisson_geometric_examples():
    np.testing.assert_allclose(poisson_geometric_convolve(0.0, 2.0).probs, atomic_pmf("bosonic", 2.0).probs)
    np.testing.assert_allclose(poisson_geometric_convolve(1.5, 0.0).probs, atomic_pmf("poisson", 1.5).probs)
    assert poisson_geometric_convolve(1.0, 1.0).probs[0] == pytest.approx(math.exp(-1) / 2, rel=1e-14)


def test_poisson_geometric_tail_ratio():
    pmf = poisson_geometric_convolve(1.0, 3.0, 1e-60)
    k = np.array([40, 80, 120])
    ratio = pmf.probs[k] / poisson_geometric_tail(1.0, 3.0, k)
    assert ratio[-1] == pytest.approx(1.0, abs=1e-10)
    # the partial exponential sum approaches its limit from below
    assert np.all(ratio <= 1 + 1e-13)
    assert np.all(np.diff(ratio) >= -1e-13)


def test_net_balance_examples():
    sp = net_balance(1.0, 1.0)
    assert sp.at(0) == pytest.approx(1 / 3, rel=1e-12)
    assert sp.at(1) == pytest.approx(1 / 6, rel=1e-12) and sp.at(-1) == pytest.approx(1 / 6, rel=1e-12)
    a = np.arange(-10, 11)
    np.testing.assert_allclose([net_balance(0.7, 2.2).at(int(x)) for x in a], net_balance_single_bank(0.7, 2.2, a), rtol=1e-11)
    one_sided = net_balance(1.3, 0.0)
    assert one_sided.min_value == 0
    np.testing.assert_allclose(one_sided.probs, bank_convolution(1.3, 1, 0.5e-12).probs)
    assert sp.total + sp.truncation_mass == pytest.approx(1.0, abs=1e-12)


def test_poisson_additivity_examples():
    n = len(atomic_pmf("poisson", 2.5))
    np.testing.assert_allclose(poisson_additivity_check(0.0, 2.5).padded(n), atomic_pmf("poisson", 2.5).probs, atol=1e-12)
    two = poisson_additivity_check(1.0, 1.0)
    ref = atomic_pmf("poisson", 2.0)
    size = max(len(two), len(ref))
    assert np.max(np.abs(two.padded(size) - ref.padded(size))) <= 1e-12
    assert poisson_additivity_check(0.5, 1.5).probs[0] == pytest.approx(math.exp(-2), rel=1e-14)


def test_value_support_respects_finite_cutoffs():
    s = solve_system(WealthSystem([SpeciesSpec("identical", 2, 3), SpeciesSpec("identical", 5, 1)], 3.0))
    pmf = weighted_convolve(system_parts(s))
    assert len(pmf) == 2 * 3 + 5 + 1
    assert pmf.is_normalized(1e-12)


def test_pmf_inputs_are_not_mutated():
    p = Pmf([0.5, 0.5])
    weighted_convolve([(p, 2), (p, 3)])
    assert p.probs.tolist() == [0.5, 0.5]
