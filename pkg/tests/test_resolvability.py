import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom

from helpers import noiseless_bit, overlap_channel, random_channel, random_density, random_pom
from qidlab.channel import WordDistribution, all_words, induced_channel
from qidlab.core import (
    FiniteDistribution,
    basis_pom,
    basis_state,
    coarsen,
    product_basis_pom,
    trivial_pom,
    validate_density,
    validate_pom,
)
from qidlab.errors import DimensionMismatch, NonRationalInput, PreconditionError, PrerequisiteNotVerified
from qidlab.families import FamilyParams, SetFamily, build_family_greedy
from qidlab.idcodes import build_simultaneous_id_code
from qidlab.resolvability import (
    DensitySample,
    MTypeDistribution,
    count_mtype_distributions,
    d1_mu_bound_check,
    d_E,
    empirical_mtype,
    id_separation_check,
    information_density_enumerate,
    mean_one_residuals,
    mtype_count_bound,
    random_selection_resolve,
    resolution,
    sup_information_rate_estimate,
)
from qidlab.transmission import QCode, build_code_exhaustive

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def expected_l1_uniform(M: int, k: int) -> float:
    """E sum_y |count_y / M - 1/k| for M uniform draws over k outcomes."""
    x = np.arange(M + 1)
    return k * float(np.sum(binom.pmf(x, M, 1 / k) * np.abs(x / M - 1 / k)))


# ---------------------------------------------------------------- resolution


def test_resolution_examples():
    assert resolution([Fraction(1, 2), Fraction(1, 2)]) == 2
    assert resolution([1]) == 1
    assert resolution([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]) == 6
    assert resolution(["1/4", "3/4"]) == 4
    assert resolution(WordDistribution.uniform(all_words(2, 2))) == 4


def test_resolution_rejects_floats():
    with pytest.raises(NonRationalInput):
        resolution([0.5, 0.5])
    with pytest.raises(NonRationalInput):
        resolution([Fraction(1, 2), Fraction(1, 3)])


def test_mtype_distribution():
    t = MTypeDistribution.from_words([(1,), (2,), (1,), (1,)])
    assert t.M == 4 and dict(t.counts) == {(1,): 3, (2,): 1}
    assert t.distribution().masses == (Fraction(3, 4), Fraction(1, 4))
    assert t.reduced_resolution == 4
    assert MTypeDistribution.from_words([(1,), (2,)] * 3).reduced_resolution == 2
    with pytest.raises(ValueError):
        MTypeDistribution(3, (((1,), 2),))


def test_mtype_count_bound():
    assert mtype_count_bound(2, 1, 3) == 8
    assert mtype_count_bound(2, 2, 4) == 256
    assert count_mtype_distributions(2, 3) == 4 <= mtype_count_bound(2, 1, 3)


# ------------------------------------------------------------------ distance


def test_d_E_examples():
    rho = basis_state(2, 0)
    sigma = basis_state(2, 1)
    assert d_E(rho, rho, basis_pom(2)) == 0
    assert d_E(rho, sigma, trivial_pom(2)) == 0
    assert d_E(rho, sigma, basis_pom(2)) == 2
    with pytest.raises(DimensionMismatch):
        d_E(rho, basis_state(3, 0), basis_pom(2))


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_coarsening_never_increases_distance(seed, k):
    rng = np.random.default_rng(seed)
    rho = validate_density(random_density(rng, 3))
    sigma = validate_density(random_density(rng, 3))
    E = validate_pom(random_pom(rng, 3, k))
    owner = rng.integers(0, 2, size=k)
    blocks = [[m for m in range(k) if owner[m] == b] for b in range(2)]
    coarse = validate_pom([D.matrix for D in coarsen(E, blocks)])
    assert d_E(rho, sigma, coarse) <= d_E(rho, sigma, E) + 1e-12


# --------------------------------------------------------------------- d1-mu


def test_d1_mu_examples():
    lhs, rhs, ok = d1_mu_bound_check([0.3, 0.7], [0.3, 0.7], 0.5)
    assert lhs == 0 and rhs > 0 and ok
    lhs, rhs, ok = d1_mu_bound_check([1, 0], [0, 1], 1.0)
    assert lhs == 2 and ok
    assert rhs == pytest.approx(2 / math.log2(math.e) + 2, abs=1e-12)
    assert rhs == pytest.approx(3.386, abs=1e-3)


def test_d1_mu_errors():
    with pytest.raises(DimensionMismatch):
        d1_mu_bound_check([1], [0.5, 0.5], 1.0)
    with pytest.raises(PreconditionError):
        d1_mu_bound_check([1], [1], 0.0)


@settings(max_examples=200, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=8), st.floats(min_value=1e-6, max_value=10))
def test_d1_mu_always_holds(seed, k, mu):
    rng = np.random.default_rng(seed)
    q = rng.dirichlet(np.ones(k))
    r = rng.dirichlet(np.ones(k))
    r[rng.random(k) < 0.3] = 0
    if r.sum() == 0:
        r[0] = 1
    r = r / r.sum()
    lhs, rhs, ok = d1_mu_bound_check(q, r, mu)
    assert ok, (lhs, rhs)


def test_d1_mu_accepts_finite_distributions():
    Q = FiniteDistribution((0.5, 0.5))
    R = FiniteDistribution((1.0, 0.0))
    assert d1_mu_bound_check(Q, R, 0.1)[2]


# ----------------------------------------------------------------- densities


def test_noiseless_densities_one_bit():
    P = WordDistribution.uniform([(1,), (2,)])
    samples = information_density_enumerate(noiseless_bit(), P, basis_pom(2))
    assert len(samples) == 2
    assert all(s.density == 1.0 for s in samples)
    assert math.fsum(s.mass for s in samples) == 1.0


def test_trivial_pom_density_zero():
    ch = overlap_channel(0.3)
    samples = information_density_enumerate(ch, WordDistribution.uniform([(1,), (2,)]), trivial_pom(2))
    assert {s.outcome for s in samples} == {0}
    assert all(abs(s.density) <= 1e-15 for s in samples)


def test_point_mass_density_zero():
    ch = overlap_channel(0.3)
    samples = information_density_enumerate(ch, WordDistribution.point((2, 1)), product_basis_pom(2, 2))
    assert all(abs(s.density) <= 1e-12 for s in samples)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_mean_one_identity(seed):
    rng = np.random.default_rng(seed)
    a, d, n = (int(rng.integers(1, 4)) for _ in range(3))
    ch = random_channel(rng, a, d)
    words = all_words(a, n)
    p = rng.dirichlet(np.ones(len(words)))
    P = WordDistribution(tuple(words), tuple(p / p.sum()))
    E = validate_pom(random_pom(rng, d**n, int(rng.integers(1, 5))))
    samples = information_density_enumerate(ch, P, E)
    assert math.fsum(s.mass for s in samples) == pytest.approx(1.0, abs=1e-9)
    assert max(abs(r) for r in mean_one_residuals(samples, n).values()) <= 1e-8


# ------------------------------------------------------------------ quantile


def _samples(pairs):
    return [DensitySample((1,), k, d, m, m) for k, (d, m) in enumerate(pairs)]


def test_quantile_examples():
    assert sup_information_rate_estimate(_samples([(1.0, 0.5), (1.0, 0.5)]), 0.3) == 1.0
    two = _samples([(0.0, 0.5), (1.0, 0.5)])
    assert sup_information_rate_estimate(two, 0.4) == 1.0
    assert sup_information_rate_estimate(two, 0.6) == 0.0
    noiseless = information_density_enumerate(noiseless_bit(), WordDistribution.uniform([(1,), (2,)]), basis_pom(2))
    assert sup_information_rate_estimate(noiseless, 0.1) == 1.0


def test_quantile_rejects_bad_delta():
    with pytest.raises(PreconditionError):
        sup_information_rate_estimate(_samples([(0.0, 1.0)]), 1.0)
    with pytest.raises(PreconditionError):
        sup_information_rate_estimate([], 0.5)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-3, 3), st.floats(0.01, 1)), min_size=1, max_size=12),
    st.floats(0.01, 0.98),
    st.floats(0.01, 0.98),
)
def test_quantile_monotone_in_delta(pairs, d1, d2):
    total = sum(m for _, m in pairs)
    s = _samples([(d, m / total) for d, m in pairs])
    lo, hi = sorted((d1, d2))
    assert sup_information_rate_estimate(s, hi) <= sup_information_rate_estimate(s, lo)


# ------------------------------------------------------------ random selection


def test_point_mass_resolves_exactly():
    ch = overlap_channel(0.5)
    rep = random_selection_resolve(ch, WordDistribution.point((1, 2)), product_basis_pom(2, 2), 5, 4, seed=1)
    assert rep.distances == (0.0,) * 4


def test_ladder_matches_multinomial_oracle():
    ch = noiseless_bit()
    P = WordDistribution.uniform(all_words(2, 2))
    E = product_basis_pom(2, 2)
    means = []
    for M in (16, 64, 256, 1024, 4096):
        rep = random_selection_resolve(ch, P, E, M, 32, seed=2024)
        means.append(rep.mean)
        assert all(0 <= d <= 2 for d in rep.distances)
        assert all(M % r == 0 for r in rep.resolutions)
        assert rep.rate == pytest.approx(math.log2(M) / 2)
        # mean of 32 trials sits within 5 standard errors of the exact expectation
        assert abs(rep.mean - expected_l1_uniform(M, 4)) <= 5 * rep.std / math.sqrt(32) + 1e-3
    assert all(b <= a for a, b in zip(means, means[1:]))
    assert means[-1] < 0.1


def test_random_selection_thread_invariant():
    ch = overlap_channel(0.4)
    P = WordDistribution.uniform(all_words(2, 2))
    E = product_basis_pom(2, 2)
    a = random_selection_resolve(ch, P, E, 100, 12, seed=5, threads=1)
    b = random_selection_resolve(ch, P, E, 100, 12, seed=5, threads=4)
    assert a.distances == b.distances and a.resolutions == b.resolutions


def test_empirical_mtype_matches_trial():
    ch = noiseless_bit()
    P = WordDistribution.uniform(all_words(2, 2))
    E = product_basis_pom(2, 2)
    rep = random_selection_resolve(ch, P, E, 64, 3, seed=9)
    for t in range(3):
        T = empirical_mtype(P, 64, 9, t)
        assert T.reduced_resolution == rep.resolutions[t]
        V = induced_channel(ch, 2, E, P.words).matrix
        approx = np.zeros(4)
        for w, c in T.counts:
            approx += c * V[P.words.index(w)]
        assert math.fsum(np.abs(approx / 64 - 0.25)) == pytest.approx(rep.distances[t], abs=1e-15)


# ---------------------------------------------------------------- separation


def _noiseless_id_code(n=6, a=5, lam=0.25, target=100, seed=1):
    ch = noiseless_bit()
    code = build_code_exhaustive(ch, n, 2**n, 0.0)
    fam = build_family_greedy(FamilyParams.create(2**n, a, lam), n_target=target, order="random", seed=seed)
    return ch, build_simultaneous_id_code(code, fam)


def test_separation_disjoint_messages():
    ch = noiseless_bit()
    code = QCode(2, tuple(all_words(2, 2)), product_basis_pom(2, 2))
    fam = SetFamily(FamilyParams.create(4, 2, 0.5), ((1, 2), (3, 4)))
    res = id_separation_check(ch, build_simultaneous_id_code(code, fam), 0.0, 0.0)
    assert res.min_distance == 2.0 and res.threshold == 2.0 and res.ok


def test_separation_lambda_point_one():
    ch = overlap_channel(0.05)
    code = build_code_exhaustive(ch, 3, 8, 0.1)
    fam = build_family_greedy(FamilyParams.create(8, 2, 0.1))
    idc = build_simultaneous_id_code(code, fam)
    res = id_separation_check(ch, idc, 0.1, 0.2)
    assert res.threshold == pytest.approx(1.4)
    assert res.ok and res.margin >= 0


def test_separation_on_built_code():
    ch, idc = _noiseless_id_code()
    res = id_separation_check(ch, idc, 0.0, 0.5)
    assert res.ok and res.min_distance >= 1.0 - 1e-9


def test_separation_trivial_pom_fails():
    ch, idc = _noiseless_id_code()
    res = id_separation_check(ch, idc, 0.0, 0.5, pom="trivial")
    assert res.min_distance == 0 and not res.ok


def test_separation_preconditions():
    ch, idc = _noiseless_id_code()
    with pytest.raises(PreconditionError):
        id_separation_check(ch, idc, 0.5, 0.5)
    with pytest.raises(PrerequisiteNotVerified):
        id_separation_check(ch, idc, 0.0, 0.1)
