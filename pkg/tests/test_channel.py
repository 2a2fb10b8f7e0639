import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import entropy_oracle, h2, ket, noiseless_bit, overlap_channel, random_channel, random_density
from qidlab.channel import (
    WordDistribution,
    all_words,
    holevo_capacity,
    holevo_quantity,
    induced_channel,
    joint_distribution,
    make_channel,
    mixed_output,
    simplex_grid,
    word_state,
)
from qidlab.core import basis_pom, maximally_mixed, product_basis_pom, trivial_pom, validate_pom, von_neumann_entropy
from qidlab.errors import AlphabetTooLarge, BadLetter, DimensionMismatch, ResourceLimit, TraceNotOne
from qidlab.settings import override

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def pure_pair_chi(p: float, s: float) -> float:
    """Holevo quantity of two pure states with overlap s, mixed with weights (1-p, p).

    The average state has eigenvalues (1 +- sqrt(1 - 4p(1-p)(1-s^2))) / 2.
    """
    root = math.sqrt(max(0.0, 1 - 4 * p * (1 - p) * (1 - s * s)))
    return h2((1 + root) / 2)


def dense_grid_capacity(s: float, mesh: float = 1e-4) -> float:
    steps = round(1 / mesh)
    return max(pure_pair_chi(k / steps, s) for k in range(steps + 1))


# --------------------------------------------------------------- channel/type


def test_make_channel_validates_signals():
    with pytest.raises(TraceNotOne):
        make_channel([np.diag([1.0, 0.1])])
    with pytest.raises(DimensionMismatch):
        make_channel([np.eye(2) / 2, np.eye(3) / 3])


# --------------------------------------------------------------- word states


def test_noiseless_word_state():
    st_ = word_state(noiseless_bit(), (1, 2))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.array_equal(st_.matrix, expected)


def test_empty_word_is_scalar_one():
    st_ = word_state(noiseless_bit(), ())
    assert st_.dim == 1 and st_.matrix[0, 0] == 1


def test_bad_letter():
    with pytest.raises(BadLetter):
        word_state(noiseless_bit(), (1, 3))
    with pytest.raises(BadLetter):
        word_state(noiseless_bit(), (0,))


def test_word_state_dimension_cap():
    with override(max_dim=16):
        with pytest.raises(ResourceLimit):
            word_state(noiseless_bit(), (1,) * 5)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(min_value=0, max_value=1))
def test_depolarized_word_state_trace(seed, q):
    rng = np.random.default_rng(seed)
    sig = [(1 - q) * random_density(rng, 2, 1) + q * np.eye(2) / 2 for _ in range(2)]
    ch = make_channel(sig)
    word = tuple(int(c) for c in rng.integers(1, 3, size=3))
    state = word_state(ch, word)
    assert abs(np.trace(state.matrix) - 1) <= 1e-9
    direct = np.kron(np.kron(sig[word[0] - 1], sig[word[1] - 1]), sig[word[2] - 1])
    assert np.max(np.abs(state.matrix - direct)) <= 1e-12


def test_disk_spill(tmp_path, monkeypatch):
    monkeypatch.setenv("QIDLAB_CACHE_DIR", str(tmp_path))
    ch = overlap_channel(0.5)
    first = word_state(ch, (1, 2, 1)).matrix
    assert len(list(tmp_path.glob("*.npy"))) == 1
    fresh = overlap_channel(0.5)  # new in-memory cache, same fingerprint
    assert np.array_equal(word_state(fresh, (1, 2, 1)).matrix, first)


# -------------------------------------------------------------- distributions


def test_word_distribution_constructors():
    P = WordDistribution.uniform(all_words(2, 2))
    assert P.exact and sum(P.masses) == 1 and len(P) == 4
    Q = WordDistribution.product([Fraction(1, 3), Fraction(2, 3)], 2)
    assert Q.as_dict()[(2, 2)] == Fraction(4, 9)
    R = WordDistribution.product([1.0, 0.0], 3)
    assert R.words == ((1, 1, 1),)
    with pytest.raises(DimensionMismatch):
        WordDistribution.from_mapping({(1,): 0.5, (1, 2): 0.5})


# -------------------------------------------------------------- mixed output


def test_mixed_output_point_mass():
    ch = overlap_channel(0.3)
    assert np.array_equal(mixed_output(ch, WordDistribution.point((2, 1))).matrix, word_state(ch, (2, 1)).matrix)


def test_mixed_output_noiseless_uniform():
    out = mixed_output(noiseless_bit(), WordDistribution.uniform([(1,), (2,)]))
    assert np.allclose(out.matrix, maximally_mixed(2).matrix, atol=1e-15)


def test_mixed_output_nonorthogonal_entropy():
    ch = overlap_channel(0.6)
    out = mixed_output(ch, WordDistribution.uniform(all_words(2, 2)))
    assert abs(np.trace(out.matrix) - 1) <= 1e-12
    single = 0.5 * (ch.signals[0].matrix + ch.signals[1].matrix)
    assert von_neumann_entropy(out) == pytest.approx(entropy_oracle(np.kron(single, single)), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(min_value=0, max_value=1))
def test_mixed_output_convex(seed, lam):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, 3, 2)
    words = all_words(3, 2)
    p = rng.dirichlet(np.ones(len(words)))
    q = rng.dirichlet(np.ones(len(words)))
    P = WordDistribution(tuple(words), tuple(p / p.sum()))
    Q = WordDistribution(tuple(words), tuple(q / q.sum()))
    mix = WordDistribution(tuple(words), tuple(lam * np.array(P.masses) + (1 - lam) * np.array(Q.masses)))
    lhs = mixed_output(ch, mix).matrix
    rhs = lam * mixed_output(ch, P).matrix + (1 - lam) * mixed_output(ch, Q).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


# ------------------------------------------------------------------- Holevo


def test_holevo_orthogonal_uniform():
    assert holevo_quantity(noiseless_bit(), [0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)


def test_holevo_point_mass_zero():
    ch = overlap_channel(0.2)
    assert holevo_quantity(ch, [1.0, 0.0]) == 0.0
    assert holevo_quantity(ch, [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)


def test_holevo_overlap_pi_over_4():
    s = math.cos(math.pi / 4)
    expected = h2((1 + s) / 2)
    assert holevo_quantity(overlap_channel(s), [0.5, 0.5]) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.60088, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(min_value=0, max_value=1))
def test_holevo_concave_on_segments(seed, lam):
    rng = np.random.default_rng(seed)
    a = int(rng.integers(2, 4))
    ch = random_channel(rng, a, int(rng.integers(2, 4)))
    p, q = rng.dirichlet(np.ones(a)), rng.dirichlet(np.ones(a))
    mid = holevo_quantity(ch, lam * p + (1 - lam) * q)
    assert mid >= lam * holevo_quantity(ch, p) + (1 - lam) * holevo_quantity(ch, q) - 1e-8


def test_holevo_mixed_signals_matches_oracle():
    rng = np.random.default_rng(11)
    sig = [random_density(rng, 3) for _ in range(3)]
    ch = make_channel(sig)
    p = np.array([0.2, 0.3, 0.5])
    expected = entropy_oracle(sum(pk * s for pk, s in zip(p, sig))) - sum(
        pk * entropy_oracle(s) for pk, s in zip(p, sig)
    )
    assert holevo_quantity(ch, p) == pytest.approx(expected, abs=1e-9)


# ----------------------------------------------------------------- capacity


def test_capacity_orthogonal():
    res = holevo_capacity(noiseless_bit())
    assert abs(res.value - 1.0) <= 1e-6
    assert res.distribution == pytest.approx((0.5, 0.5), abs=1e-3)


def test_capacity_single_letter_and_identical_signals():
    assert holevo_capacity(make_channel([np.eye(2) / 2])).value == 0.0
    same = make_channel([ket(1, 0), ket(1, 0)])
    assert holevo_capacity(same).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75, math.cos(math.pi / 4)])
def test_capacity_overlap_matches_dense_grid(s):
    res = holevo_capacity(overlap_channel(s))
    assert res.value == pytest.approx(dense_grid_capacity(s), abs=1e-4)
    assert res.value == pytest.approx(holevo_quantity(overlap_channel(s), res.distribution), abs=1e-12)


def test_capacity_alphabet_cap():
    rng = np.random.default_rng(0)
    with override(max_alphabet=2):
        with pytest.raises(AlphabetTooLarge):
            holevo_capacity(random_channel(rng, 3, 2))


def test_capacity_grid_coarsened_to_budget():
    rng = np.random.default_rng(1)
    ch = random_channel(rng, 4, 2)
    with override(max_grid_points=100):
        res = holevo_capacity(ch, grid_steps=16)
    assert res.grid_points <= 100 and res.grid_steps < 16


def test_capacity_refinement_never_decreases():
    rng = np.random.default_rng(5)
    ch = random_channel(rng, 3, 3)
    values = [holevo_capacity(ch, grid_steps=k).grid_value for k in (2, 4, 8, 16)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    refined = holevo_capacity(ch, grid_steps=16)
    assert refined.value >= refined.grid_value


def test_capacity_thread_independent():
    rng = np.random.default_rng(2)
    ch = random_channel(rng, 3, 2)
    a = holevo_capacity(ch, threads=1)
    b = holevo_capacity(ch, threads=3)
    assert a == b


def test_simplex_grid_lexicographic():
    g = simplex_grid(3, 2)
    assert g == sorted(g) and len(g) == 6 and all(sum(x) == 2 for x in g)


# ------------------------------------------------------------ induced channel


def test_induced_noiseless_identity():
    V = induced_channel(noiseless_bit(), 1, basis_pom(2), [(1,), (2,)])
    assert np.array_equal(V.matrix, np.eye(2))


def test_induced_trivial_pom_rows_one():
    ch = overlap_channel(0.4)
    V = induced_channel(ch, 2, trivial_pom(4), all_words(2, 2))
    assert np.allclose(V.matrix, 1.0, atol=1e-12)


def test_induced_product_basis_permutation():
    V = induced_channel(noiseless_bit(), 2, product_basis_pom(2, 2), all_words(2, 2))
    assert np.array_equal(V.matrix, np.eye(4))
    assert V.row((2, 1)).tolist() == [0, 0, 1, 0]


def test_induced_dim_mismatch():
    with pytest.raises(DimensionMismatch):
        induced_channel(noiseless_bit(), 2, basis_pom(2), [(1, 1)])


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_induced_rows_normalized_and_joint(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, 2, 2)
    from helpers import random_pom

    E = validate_pom(random_pom(rng, 4, 3))
    words = all_words(2, 2)
    V = induced_channel(ch, 2, E, words)
    assert np.max(np.abs(V.matrix.sum(axis=1) - 1)) <= 1e-9
    P = WordDistribution.uniform(words)
    J = joint_distribution(V, P)
    assert J.sum() == pytest.approx(1.0, abs=1e-12)
    born = np.array([[np.trace(word_state(ch, w).matrix @ e).real for e in E.effects] for w in words]) / 4
    assert np.allclose(J, born, atol=1e-12)
