"""Classical-quantum channels and the Holevo quantity.

Letters are 1-based (alphabet ``{1, ..., a}``); a word is a tuple of letters.
Distributions over words are stored sparsely as :class:`WordDistribution`.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._parallel import ordered_map
from .core import (
    POM,
    DensityOperator,
    FiniteDistribution,
    _check_dim,
    _frozen,
    eigvalsh,
    measure,
    validate_density,
    validate_distribution,
    von_neumann_entropy,
)
from .errors import (
    AlphabetTooLarge,
    BadLetter,
    DimensionMismatch,
    NotNormalized,
    ResourceLimit,
)
from .settings import get_settings

Word = tuple[int, ...]


@dataclass(frozen=True)
class WordDistribution:
    """Sparse probability distribution over words of a common length.

    Only words with positive mass are stored.  Masses are all
    :class:`~fractions.Fraction` or all float.
    """

    words: tuple[Word, ...]
    masses: tuple

    @property
    def n(self) -> int:
        return len(self.words[0])

    def __len__(self) -> int:
        return len(self.words)

    def items(self):
        return zip(self.words, self.masses)

    @property
    def exact(self) -> bool:
        return all(isinstance(m, Fraction) for m in self.masses)

    def mass_array(self) -> np.ndarray:
        return np.array([float(m) for m in self.masses])

    def as_dict(self) -> dict[Word, object]:
        return dict(zip(self.words, self.masses))

    @classmethod
    def from_mapping(cls, mapping: Mapping[Sequence[int], object]) -> "WordDistribution":
        words, masses = [], []
        for w, m in mapping.items():
            if m:
                words.append(tuple(int(c) for c in w))
                masses.append(m)
        if not words:
            raise NotNormalized("distribution has no positive mass")
        if len({len(w) for w in words}) != 1:
            raise DimensionMismatch("all words must have the same length")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in distribution")
        masses = validate_distribution(masses).masses
        return cls(tuple(words), masses)

    @classmethod
    def point(cls, word: Sequence[int]) -> "WordDistribution":
        return cls((tuple(word),), (Fraction(1),))

    @classmethod
    def uniform(cls, words: Iterable[Sequence[int]]) -> "WordDistribution":
        words = tuple(tuple(w) for w in words)
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in uniform support")
        return cls(words, (Fraction(1, len(words)),) * len(words))

    @classmethod
    def product(cls, letter_masses: Sequence, n: int) -> "WordDistribution":
        """i.i.d. extension of a single-letter distribution to length ``n``."""
        P = validate_distribution(letter_masses)
        letters = [(k + 1, m) for k, m in enumerate(P.masses) if m > 0]
        cap = get_settings().max_support
        if len(letters) ** n > cap:
            raise ResourceLimit(f"product support {len(letters)}**{n} exceeds cap {cap}")
        words, masses = [], []
        for combo in itertools.product(letters, repeat=n):
            words.append(tuple(c for c, _ in combo))
            masses.append(math.prod((m for _, m in combo), start=type(P.masses[0])(1)))
        return cls(tuple(words), tuple(masses))


def all_words(alphabet_size: int, n: int) -> list[Word]:
    return [tuple(w) for w in itertools.product(range(1, alphabet_size + 1), repeat=n)]


@dataclass(frozen=True, eq=False)
class CQChannel:
    """Map from letters ``1..a`` to states on a common ``dim``-dimensional space."""

    signals: tuple[DensityOperator, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def alphabet_size(self) -> int:
        return len(self.signals)

    @property
    def dim(self) -> int:
        return self.signals[0].dim

    def __repr__(self) -> str:
        return f"CQChannel(alphabet_size={self.alphabet_size}, dim={self.dim})"

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for s in self.signals:
            h.update(np.ascontiguousarray(s.matrix).tobytes())
        return h.hexdigest()


def make_channel(signals: Sequence) -> CQChannel:
    """Validate every signal and build the channel."""
    if not signals:
        raise ValueError("alphabet must be nonempty")
    states = []
    for s in signals:
        states.append(s if isinstance(s, DensityOperator) else validate_density(s))
    if len({s.dim for s in states}) != 1:
        raise DimensionMismatch("all signals must act on the same space")
    return CQChannel(tuple(states))


def _disk_cache_path(ch: CQChannel, word: Word) -> str | None:
    root = os.environ.get("QIDLAB_CACHE_DIR")
    if not root:
        return None
    key = hashlib.sha256((ch.fingerprint() + repr(word)).encode()).hexdigest()
    return os.path.join(root, key + ".npy")


def word_state(ch: CQChannel, word: Sequence[int]) -> DensityOperator:
    """Memoryless output state ``W_{x1} (x) ... (x) W_{xn}``.

    Results are memoized on the channel; when ``QIDLAB_CACHE_DIR`` is set
    they are also spilled to ``.npy`` files there.
    """
    word = tuple(word)
    for c in word:
        if not 1 <= c <= ch.alphabet_size:
            raise BadLetter(f"letter {c} outside 1..{ch.alphabet_size}")
    _check_dim(ch.dim ** len(word))
    hit = ch._cache.get(word)
    if hit is not None:
        return hit
    path = _disk_cache_path(ch, word)
    if path and os.path.exists(path):
        state = DensityOperator(_frozen(np.load(path)))
    else:
        out = np.ones((1, 1), dtype=complex)
        for c in word:
            out = np.kron(out, ch.signals[c - 1].matrix)
        state = DensityOperator(_frozen(out))
        if path:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            np.save(path, state.matrix)
    with ch._lock:
        ch._cache.setdefault(word, state)
    return state


def _weights(P: WordDistribution) -> list[float]:
    return [float(m) for m in P.masses]


def mixed_output(ch: CQChannel, P: WordDistribution) -> DensityOperator:
    """``sum_x P(x) W^n_x`` accumulated in one dense matrix."""
    cap = get_settings().max_support
    if len(P) > cap:
        raise ResourceLimit(f"support size {len(P)} exceeds cap {cap}")
    acc = None
    for w, m in zip(P.words, _weights(P)):
        term = m * word_state(ch, w).matrix
        acc = term if acc is None else acc + term
    return DensityOperator(_frozen(acc))


def _letter_masses(ch: CQChannel, P) -> np.ndarray:
    p = P.as_array() if isinstance(P, FiniteDistribution) else np.asarray(P, dtype=float)
    if p.shape != (ch.alphabet_size,):
        raise DimensionMismatch(f"expected {ch.alphabet_size} letter masses, got {p.shape}")
    return p


def holevo_quantity(ch: CQChannel, P) -> float:
    """``H(sum_x P(x) W_x) - sum_x P(x) H(W_x)`` in bits, clamped at 0."""
    p = _letter_masses(ch, P)
    entropies = np.array([von_neumann_entropy(s) for s in ch.signals])
    return _chi(ch, p, entropies)


def _chi(ch: CQChannel, p: np.ndarray, entropies: np.ndarray) -> float:
    avg = sum(pk * s.matrix for pk, s in zip(p, ch.signals) if pk)
    ev = np.clip(eigvalsh(avg), 0.0, 1.0)
    ev = ev[ev > 0]
    h = float(-np.sum(ev * np.log2(ev)))
    return max(0.0, h - float(np.dot(p, entropies)))


@dataclass(frozen=True)
class CapacityResult:
    value: float
    distribution: tuple[float, ...]
    grid_steps: int
    grid_points: int
    grid_value: float
    iterations: int
    starts: int


def simplex_grid(a: int, steps: int) -> list[tuple[int, ...]]:
    """All compositions of ``steps`` into ``a`` nonnegative parts, lexicographic."""
    if a == 1:
        return [(steps,)]
    out = []
    for first in range(steps, -1, -1):
        for rest in simplex_grid(a - 1, steps - first):
            out.append((first,) + rest)
    return sorted(out)


def _grid_size(a: int, steps: int) -> int:
    return math.comb(steps + a - 1, a - 1)


def _pair_ascent(f, p: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    """Maximize ``f`` by mass transfers between coordinate pairs.

    For a concave ``f`` a point that no pairwise transfer improves satisfies
    the simplex optimality conditions, so this reaches the global maximum.
    """
    p = p.copy()
    val = f(p)
    a = len(p)
    it = 0
    for it in range(1, max_iter + 1):
        start = val
        for i, j in itertools.combinations(range(a), 2):
            lo, hi = -p[i], p[j]
            if hi - lo <= 0:
                continue
            direction = np.zeros(a)
            direction[i], direction[j] = 1.0, -1.0

            def g(t):
                q = np.clip(p + t * direction, 0.0, None)
                return -f(q / q.sum())

            res = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            cand_t = [res.x, lo, hi]
            best_t = min(cand_t, key=g)
            cand_val = -g(best_t)
            if cand_val > val:
                q = np.clip(p + best_t * direction, 0.0, None)
                p, val = q / q.sum(), cand_val
        if val - start < tol:
            break
    return p, val, it


def holevo_capacity(
    ch: CQChannel,
    grid_steps: int | None = None,
    max_iter: int | None = None,
    starts: int = 4,
    threads: int | None = None,
) -> CapacityResult:
    """Maximize the Holevo quantity over the input simplex.

    A uniform grid of mesh ``1/grid_steps`` is evaluated first; the best
    ``starts`` grid points are then refined by pairwise coordinate ascent.
    The returned value is attained by the returned distribution, so it is a
    lower bound on the maximum.  If the grid would exceed
    ``max_grid_points`` the mesh is coarsened and the actual step count is
    reported.
    """
    cfg = get_settings()
    a = ch.alphabet_size
    if a > cfg.max_alphabet:
        raise AlphabetTooLarge(f"alphabet size {a} exceeds cap {cfg.max_alphabet}")
    steps = cfg.grid_steps if grid_steps is None else grid_steps
    max_iter = cfg.ascent_max_iter if max_iter is None else max_iter
    while steps > 1 and _grid_size(a, steps) > cfg.max_grid_points:
        steps -= 1
    entropies = np.array([von_neumann_entropy(s) for s in ch.signals])

    def f(p):
        return _chi(ch, p, entropies)

    if a == 1:
        return CapacityResult(0.0, (1.0,), steps, 1, 0.0, 0, 1)

    grid = simplex_grid(a, steps)
    points = [np.array(g, dtype=float) / steps for g in grid]
    values = ordered_map(f, points, threads)
    # max value, ties to the lexicographically smallest point
    order = sorted(range(len(grid)), key=lambda k: (-values[k], grid[k]))
    grid_best = values[order[0]]

    refined = ordered_map(
        lambda k: _pair_ascent(f, points[k], cfg.ascent_tol, max_iter),
        order[:starts],
        threads,
    )
    candidates = [(v, tuple(float(x) for x in p), it) for p, v, it in refined]
    candidates.append((grid_best, tuple(float(x) for x in points[order[0]]), 0))
    best = min(candidates, key=lambda c: (-c[0], c[1]))
    iterations = max(c[2] for c in candidates)
    return CapacityResult(
        value=best[0],
        distribution=best[1],
        grid_steps=steps,
        grid_points=len(grid),
        grid_value=grid_best,
        iterations=iterations,
        starts=min(starts, len(grid)),
    )


@dataclass(frozen=True)
class InducedClassicalChannel:
    """Rows ``V(.|x) = W^n_x(E)`` for each input word ``x``."""

    n: int
    words: tuple[Word, ...]
    labels: tuple
    matrix: np.ndarray = field(repr=False)

    @property
    def outcomes(self) -> int:
        return self.matrix.shape[1]

    def row(self, word: Word) -> np.ndarray:
        return self.matrix[self.words.index(tuple(word))]


def induced_channel(ch: CQChannel, n: int, E: POM, words: Iterable[Sequence[int]]) -> InducedClassicalChannel:
    if E.dim != ch.dim**n:
        raise DimensionMismatch(f"POM dim {E.dim} != channel dim**n = {ch.dim ** n}")
    words = tuple(tuple(w) for w in words)
    for w in words:
        if len(w) != n:
            raise DimensionMismatch(f"word {w} has length {len(w)}, expected {n}")
    rows = [measure(word_state(ch, w), E).masses for w in words]
    mat = np.array(rows, dtype=float).reshape(len(words), len(E))
    mat.setflags(write=False)
    return InducedClassicalChannel(n, words, E.labels, mat)


def joint_distribution(V: InducedClassicalChannel, P: WordDistribution) -> np.ndarray:
    """``P(x) V(y|x)`` as a ``(len(P), outcomes)`` array in ``P``'s word order."""
    index = {w: k for k, w in enumerate(V.words)}
    rows = np.array([V.matrix[index[w]] for w in P.words])
    return P.mass_array()[:, None] * rows
