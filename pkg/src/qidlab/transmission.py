"""Transmission (Q) codes: verification and two constructions.

A code is a list of codewords plus a decoding POM whose first ``M`` effects
decode the codewords in order.  An optional trailing effect collects the
remainder of the identity ("fail" outcome).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import CQChannel, WordDistribution, all_words, induced_channel, word_state
from .core import POM, born, coarsen, eigvalsh, validate_pom
from .errors import (
    DimensionMismatch,
    EmptyGoodSet,
    InvariantViolation,
    NotFound,
    PreconditionError,
    ResourceLimit,
)
from .rng import stream
from .settings import get_settings

Word = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class QCode:
    n: int
    codewords: tuple[Word, ...]
    decoder: POM
    has_fail: bool = False

    def __post_init__(self):
        expected = len(self.codewords) + (1 if self.has_fail else 0)
        if len(self.decoder) != expected:
            raise DimensionMismatch(
                f"decoder has {len(self.decoder)} effects, expected {expected}"
            )

    @property
    def M(self) -> int:
        return len(self.codewords)


@dataclass(frozen=True)
class CodeVerification:
    successes: tuple[float, ...]

    @property
    def eps_hat(self) -> float:
        return 1.0 - min(self.successes)


def verify_qcode(ch: CQChannel, code: QCode) -> CodeVerification:
    """Exact Born-rule success probability of every codeword."""
    if code.decoder.dim != ch.dim**code.n:
        raise DimensionMismatch(f"decoder dim {code.decoder.dim} != {ch.dim}**{code.n}")
    successes = tuple(
        born(word_state(ch, c).matrix, code.decoder.effects[m]) for m, c in enumerate(code.codewords)
    )
    tol = get_settings().validation_tol
    if any(s < -tol or s > 1 + tol for s in successes):
        raise InvariantViolation(f"success probability outside [0, 1]: {successes}")
    return CodeVerification(successes)


def square_root_measurement(states: Sequence[np.ndarray]) -> tuple[list[np.ndarray], bool]:
    """Pretty-good measurement for equiprobable ``states``.

    Returns the effects ``S^{-1/2} rho_m S^{-1/2}`` (``S = sum rho_m``,
    inverse taken on the support) and, when ``S`` is rank deficient, a
    trailing fail effect projecting onto its kernel.  The flag tells whether
    the fail effect was appended.
    """
    S = sum(states)
    w, V = np.linalg.eigh(S)
    tol = get_settings().validation_tol
    keep = w > tol
    inv_sqrt = np.zeros_like(w)
    inv_sqrt[keep] = 1.0 / np.sqrt(w[keep])
    T = (V * inv_sqrt) @ V.conj().T
    effects = [T @ rho @ T for rho in states]
    if keep.all():
        return effects, False
    kernel = V[:, ~keep]
    return effects + [kernel @ kernel.conj().T], True


def srm_code(ch: CQChannel, codewords: Sequence[Word]) -> QCode:
    codewords = tuple(tuple(c) for c in codewords)
    n = len(codewords[0])
    effects, has_fail = square_root_measurement([word_state(ch, c).matrix for c in codewords])
    return QCode(n, codewords, validate_pom(effects), has_fail)


def build_code_exhaustive(ch: CQChannel, n: int, M: int, eps_target: float) -> QCode:
    """First lexicographic ``M``-subset of words whose SRM code meets ``eps_target``.

    Raises :class:`NotFound` (with the best code seen) when no subset does,
    and :class:`ResourceLimit` when the search space exceeds ``max_search``.
    """
    cfg = get_settings()
    a = ch.alphabet_size
    if a**n > cfg.max_support:
        raise ResourceLimit(f"{a}**{n} words exceed the support cap {cfg.max_support}")
    if M < 1:
        raise PreconditionError("M must be at least 1")
    if M > a**n:
        raise NotFound(f"M={M} exceeds the number of words {a ** n}")
    space = math.comb(a**n, M)
    if space > cfg.max_search:
        raise ResourceLimit(f"search space C({a ** n}, {M}) = {space} exceeds cap {cfg.max_search}")
    best, best_eps = None, math.inf
    for combo in itertools.combinations(all_words(a, n), M):
        code = srm_code(ch, combo)
        eps = verify_qcode(ch, code).eps_hat
        if eps <= eps_target:
            return code
        if eps < best_eps:
            best, best_eps = code, eps
    raise NotFound(f"no ({n}, {M}) code with error <= {eps_target}", best, best_eps)


@dataclass(frozen=True)
class RandomCodingAttempt:
    codewords: tuple[Word, ...]
    decoding_sets: tuple[tuple[int, ...], ...]
    successes: tuple[float, ...]
    chain_bounds: tuple[float, ...]

    @property
    def eps_hat(self) -> float:
        return 1.0 - min(self.successes)


@dataclass(frozen=True, eq=False)
class RandomCodingResult:
    code: QCode
    M: int
    threshold: float
    good_words: tuple[Word, ...]
    good_mass: float
    attempts: tuple[RandomCodingAttempt, ...] = field(repr=False)
    best_attempt: int = 0

    @property
    def eps_hat(self) -> float:
        return self.attempts[self.best_attempt].eps_hat


def decoding_sets(V: np.ndarray, output: np.ndarray, n: int, threshold: float) -> list[tuple[int, ...]]:
    """``D(x) = {y : (1/n) log2(V[x, y] / output[y]) > threshold}`` for each row.

    Outcomes with zero output mass or zero row mass never qualify.
    """
    out = []
    for row in V:
        ok = (row > 0) & (output > 0)
        dens = np.full(row.shape, -np.inf)
        dens[ok] = np.log2(row[ok] / output[ok]) / n
        out.append(tuple(int(y) for y in np.flatnonzero(dens > threshold)))
    return out


def build_code_random_coding(
    ch: CQChannel,
    n: int,
    E: POM,
    P: WordDistribution,
    rate: float,
    gamma: float,
    alpha: float,
    seed: int,
    retries: int | None = None,
    distinct: bool = True,
    eps_target: float | None = None,
) -> RandomCodingResult:
    """Threshold-decoding random code over the measured channel.

    Codewords are drawn from ``P`` conditioned on the good set ``G`` of
    words whose own decoding set catches at least ``alpha/2`` of their
    output.  With ``distinct`` each draw excludes the words already chosen
    (conditional sampling); otherwise draws are i.i.d. and repeats get empty
    decoding sets.  Codeword ``i`` decodes on ``D(c_i)`` minus all earlier
    ``D(c_j)``; a fail effect absorbs the rest of the identity.  The best of
    ``retries`` attempts (seed streams ``0..retries-1``) is returned.
    """
    cfg = get_settings()
    retries = cfg.retry_budget if retries is None else retries
    M = math.floor(2 ** (n * rate))
    if M < 1:
        raise PreconditionError(f"rate {rate} gives M = {M} < 1")
    if E.dim != ch.dim**n:
        raise DimensionMismatch(f"POM dim {E.dim} != {ch.dim}**{n}")
    if P.n != n:
        raise DimensionMismatch(f"input words have length {P.n}, expected {n}")

    ind = induced_channel(ch, n, E, P.words)
    V = ind.matrix
    pmass = P.mass_array()
    output = pmass @ V
    threshold = rate + gamma
    D = decoding_sets(V, output, n, threshold)
    caught = np.array([V[k, list(Dx)].sum() if Dx else 0.0 for k, Dx in enumerate(D)])
    good = np.flatnonzero(caught >= alpha / 2)
    good_mass = float(pmass[good].sum())
    if good.size == 0 or good_mass <= 0:
        raise EmptyGoodSet(f"no input word has decoding mass >= alpha/2 at threshold {threshold}")
    if distinct and M > good.size:
        raise NotFound(f"M={M} distinct codewords requested but only {good.size} good words")
    Q = pmass[good] / good_mass

    attempts = []
    for r in range(retries):
        rng = stream(seed, r)
        if distinct:
            picks, avail = [], np.ones(good.size, dtype=bool)
            for _ in range(M):
                q = np.where(avail, Q, 0.0)
                k = int(rng.choice(good.size, p=q / q.sum()))
                avail[k] = False
                picks.append(int(good[k]))
        else:
            picks = [int(good[k]) for k in rng.choice(good.size, size=M, p=Q)]
        taken: set[int] = set()
        sets, successes, bounds = [], [], []
        for i, k in enumerate(picks):
            Di = tuple(y for y in D[k] if y not in taken)
            taken.update(D[k])
            sets.append(Di)
            successes.append(float(V[k, list(Di)].sum()) if Di else 0.0)
            earlier = sum(float(V[k, list(D[picks[j]])].sum()) for j in range(i) if D[picks[j]])
            bounds.append(float(V[k, list(D[k])].sum()) - earlier)
        attempts.append(
            RandomCodingAttempt(
                tuple(P.words[k] for k in picks), tuple(sets), tuple(successes), tuple(bounds)
            )
        )

    best = min(range(len(attempts)), key=lambda r: (attempts[r].eps_hat, r))
    chosen = attempts[best]
    effects = [e.matrix for e in coarsen(E, chosen.decoding_sets)]
    fail = np.eye(E.dim) - sum(effects)
    decoder = validate_pom(effects + [fail])
    code = QCode(n, chosen.codewords, decoder, has_fail=True)
    if eps_target is not None and chosen.eps_hat > eps_target:
        raise NotFound(f"best random code has error {chosen.eps_hat} > {eps_target}", code, chosen.eps_hat)
    return RandomCodingResult(
        code=code,
        M=M,
        threshold=threshold,
        good_words=tuple(P.words[k] for k in good),
        good_mass=good_mass,
        attempts=tuple(attempts),
        best_attempt=best,
    )
