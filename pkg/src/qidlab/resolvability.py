"""Resolution, measured-output distances and the information spectrum.

Finite-``n`` counterparts of the resolvability argument: M-type
approximations of an input distribution by random selection, information
densities of the measured channel, a quantile proxy for the sup-information
rate, and the distance inequalities the converse rests on.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ._parallel import ordered_map
from .channel import CQChannel, WordDistribution, induced_channel, word_state
from .core import POM, DensityOperator, FiniteDistribution, measure, trivial_pom, variational_distance
from .errors import (
    DimensionMismatch,
    NonRationalInput,
    PreconditionError,
    PrerequisiteNotVerified,
)
from .idcodes import SimQIDCode, verify_id_code
from .rng import stream
from .settings import get_settings

LOG2E = math.log2(math.e)


# ------------------------------------------------------------------- M-types


@dataclass(frozen=True)
class MTypeDistribution:
    """Counts over words summing to ``M``; masses are ``count / M``."""

    M: int
    counts: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        if self.M < 1 or sum(c for _, c in self.counts) != self.M or any(c < 0 for _, c in self.counts):
            raise ValueError("counts must be nonnegative and sum to M")

    @classmethod
    def from_words(cls, words: Sequence[tuple[int, ...]]) -> "MTypeDistribution":
        counted = Counter(tuple(w) for w in words)
        return cls(len(words), tuple(sorted(counted.items())))

    def distribution(self) -> WordDistribution:
        items = [(w, Fraction(c, self.M)) for w, c in self.counts if c]
        return WordDistribution(tuple(w for w, _ in items), tuple(m for _, m in items))

    @property
    def reduced_resolution(self) -> int:
        return self.M // math.gcd(self.M, *(c for _, c in self.counts))


def resolution(P) -> int:
    """Smallest ``M`` such that every mass is a multiple of ``1/M``.

    Masses must be exact (``int``, :class:`~fractions.Fraction` or a
    rational string like ``"1/3"``); floats are rejected.
    """
    masses = P.masses if isinstance(P, (FiniteDistribution, WordDistribution)) else P
    exact = []
    for m in masses:
        if isinstance(m, float) or isinstance(m, bool):
            raise NonRationalInput(f"mass {m!r} is not an exact rational")
        exact.append(Fraction(m))
    if sum(exact) != 1 or any(m < 0 for m in exact):
        raise NonRationalInput("masses must be nonnegative and sum to exactly 1")
    return math.lcm(*(m.denominator for m in exact))


def mtype_count_bound(alphabet_size: int, n: int, M: int) -> int:
    """``|A| ** (n M)``: M-tuples of words, hence an upper bound on M-types over ``A^n``."""
    return alphabet_size ** (n * M)


def count_mtype_distributions(support_size: int, M: int) -> int:
    """Number of distinct M-type distributions on ``support_size`` points, by enumeration."""
    seen = set()
    for tup in itertools.product(range(support_size), repeat=M):
        seen.add(tuple(sorted(Counter(tup).items())))
    return len(seen)


# ------------------------------------------------------------------ distance


def d_E(rho: DensityOperator, sigma: DensityOperator, E: POM) -> float:
    """l1 distance between the outcome distributions of ``E`` on two states."""
    if rho.dim != sigma.dim or rho.dim != E.dim:
        raise DimensionMismatch(f"dims {rho.dim}, {sigma.dim} and POM {E.dim} differ")
    return variational_distance(measure(rho, E), measure(sigma, E))


def d1_mu_bound_check(Q, R, mu: float, slack: float = 1e-12) -> tuple[float, float, bool]:
    """Evaluate ``d1(Q, R) <= (2 / log2 e) mu + 2 Q[log2(Q/R) > mu]``.

    Points with ``R = 0 < Q`` count towards the tail (log ratio ``+inf``);
    points with ``Q = 0`` never do.
    """
    q = Q.as_array() if isinstance(Q, FiniteDistribution) else np.asarray(Q, dtype=float)
    r = R.as_array() if isinstance(R, FiniteDistribution) else np.asarray(R, dtype=float)
    if q.shape != r.shape:
        raise DimensionMismatch(f"support sizes differ: {q.shape} vs {r.shape}")
    if mu <= 0:
        raise PreconditionError("mu must be positive")
    lhs = math.fsum(np.abs(q - r))
    tail = []
    for qx, rx in zip(q, r):
        if qx <= 0:
            continue
        if rx <= 0 or math.log2(qx / rx) > mu:
            tail.append(qx)
    rhs = 2 * mu / LOG2E + 2 * math.fsum(tail)
    return lhs, rhs, lhs <= rhs + slack


# -------------------------------------------------------- information density


class DensitySample(NamedTuple):
    word: tuple[int, ...]
    outcome: int
    density: float
    mass: float
    input_mass: float


def information_density_enumerate(ch: CQChannel, P: WordDistribution, E: POM) -> list[DensitySample]:
    """Every ``(x, y)`` with positive joint mass and its normalized density.

    ``density = (1/n) log2(W^n_x(E_y) / P W^n(E_y))``; ``outcome`` is the
    0-based effect index.
    """
    n = P.n
    V = induced_channel(ch, n, E, P.words).matrix
    p = P.mass_array()
    output = p @ V
    samples = []
    for k, w in enumerate(P.words):
        for y in np.flatnonzero(V[k] > 0):
            if output[y] <= 0:
                continue
            dens = math.log2(V[k, y] / output[y]) / max(n, 1)
            samples.append(DensitySample(w, int(y), dens, float(p[k] * V[k, y]), float(p[k])))
    return samples


def mean_one_residuals(samples: Sequence[DensitySample], n: int) -> dict[int, float]:
    """``sum_x P(x) 2**(n * density(x, y)) - 1`` per outcome ``y``."""
    acc: dict[int, list[float]] = {}
    for s in samples:
        acc.setdefault(s.outcome, []).append(s.input_mass * 2 ** (n * s.density))
    return {y: math.fsum(v) - 1.0 for y, v in acc.items()}


def sup_information_rate_estimate(samples: Sequence[DensitySample], delta: float) -> float:
    """Smallest sample density ``b`` whose upper tail mass ``P[density > b]`` is ``<= delta``."""
    if not samples:
        raise PreconditionError("no density samples")
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    by_value: dict[float, list[float]] = {}
    for s in samples:
        by_value.setdefault(s.density, []).append(s.mass)
    values = sorted(by_value)
    masses = [math.fsum(by_value[v]) for v in values]
    # tails[k] = mass strictly above values[k]
    tails = [math.fsum(masses[k + 1 :]) for k in range(len(values))]
    for v, t in zip(values, tails):
        if t <= delta:
            return v
    return values[-1]


# --------------------------------------------------------- random selection


@dataclass(frozen=True)
class ResolvabilityReport:
    n: int
    M: int
    trials: int
    distances: tuple[float, ...] = field(repr=False)
    resolutions: tuple[int, ...] = field(repr=False)
    seed: int = 0

    @property
    def mean(self) -> float:
        return math.fsum(self.distances) / self.trials

    @property
    def min(self) -> float:
        return min(self.distances)

    @property
    def max(self) -> float:
        return max(self.distances)

    @property
    def std(self) -> float:
        if self.trials < 2:
            return 0.0
        mu = self.mean
        return math.sqrt(math.fsum((d - mu) ** 2 for d in self.distances) / (self.trials - 1))

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.trials)

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.n if self.n else math.inf


def random_selection_resolve(
    ch: CQChannel,
    P: WordDistribution,
    E: POM,
    M: int,
    trials: int,
    seed: int,
    threads: int | None = None,
) -> ResolvabilityReport:
    """Approximate ``P W^n`` by the empirical distribution of ``M`` i.i.d. draws.

    Trial ``t`` draws from stream ``(seed, t)``; the distance in each trial
    is ``d_E(P W^n, P~ W^n)``.
    """
    if M < 1:
        raise PreconditionError("M must be at least 1")
    if trials < 1:
        raise PreconditionError("need at least one trial")
    V = induced_channel(ch, P.n, E, P.words).matrix
    p = P.mass_array()
    target = p @ V

    def trial(t: int) -> tuple[float, int]:
        rng = stream(seed, t)
        counts = np.bincount(rng.choice(len(p), size=M, p=p), minlength=len(p))
        approx = (counts @ V) / M
        res = M // math.gcd(M, *(int(c) for c in counts))
        return variational_distance(target, approx), res

    results = ordered_map(trial, range(trials), threads)
    return ResolvabilityReport(
        n=P.n,
        M=M,
        trials=trials,
        distances=tuple(d for d, _ in results),
        resolutions=tuple(r for _, r in results),
        seed=seed,
    )


def empirical_mtype(P: WordDistribution, M: int, seed: int, trial: int = 0) -> MTypeDistribution:
    """The M-type distribution drawn in trial ``trial`` of :func:`random_selection_resolve`."""
    rng = stream(seed, trial)
    idx = rng.choice(len(P), size=M, p=P.mass_array())
    return MTypeDistribution.from_words([P.words[k] for k in idx])


# ---------------------------------------------------------------- separation


@dataclass(frozen=True)
class SeparationResult:
    min_distance: float
    threshold: float
    ok: bool
    worst_pair: tuple[int, int] | None
    lam1_hat: float
    lam2_hat: float

    @property
    def margin(self) -> float:
        return self.min_distance - self.threshold


def message_output_distributions(ch: CQChannel, code: SimQIDCode, pom: POM | None = None) -> np.ndarray:
    """Row ``i``: outcome distribution of ``pom`` (default the code's) on ``P_i W^n``."""
    pom = code.base_pom if pom is None else pom
    if pom.dim != ch.dim**code.n:
        raise DimensionMismatch(f"POM dim {pom.dim} != {ch.dim}**{code.n}")
    words = sorted({w for P in code.inputs for w in P.words})
    index = {w: k for k, w in enumerate(words)}
    B = np.array([pom.born_row(word_state(ch, w).matrix) for w in words])
    rows = []
    for P in code.inputs:
        sel = B[[index[w] for w in P.words]]
        if P.exact:
            den = math.lcm(*(m.denominator for m in P.masses))
            rows.append((np.array([float(m * den) for m in P.masses]) @ sel) / den)
        else:
            rows.append(P.mass_array() @ sel)
    return np.array(rows)


def id_separation_check(
    ch: CQChannel,
    code: SimQIDCode,
    lam1: float,
    lam2: float,
    pom: POM | str | None = None,
) -> SeparationResult:
    """Pairwise measured distances of the message outputs against ``2(1 - lam1 - lam2)``.

    The code must first verify at ``(lam1, lam2)``.  Distances use the code's
    base POM unless ``pom`` is given (``"trivial"`` selects the one-outcome
    measurement).
    """
    if lam1 < 0 or lam2 < 0 or lam1 + lam2 >= 1:
        raise PreconditionError(f"need lam1 + lam2 < 1, got {lam1} + {lam2}")
    tol = get_settings().validation_tol
    ver = verify_id_code(ch, code)
    if ver.lam1_hat > lam1 + tol or ver.lam2_hat > lam2 + tol:
        raise PrerequisiteNotVerified(
            f"code verifies at ({ver.lam1_hat}, {ver.lam2_hat}), not within ({lam1}, {lam2})"
        )
    if pom == "trivial":
        pom = trivial_pom(code.base_pom.dim)
    out = message_output_distributions(ch, code, pom)
    threshold = 2 * (1 - lam1 - lam2)
    best, worst = math.inf, None
    for i, j in itertools.combinations(range(code.N), 2):
        d = math.fsum(np.abs(out[i] - out[j]))
        if d < best:
            best, worst = d, (i, j)
    if worst is None:
        best = math.inf
    return SeparationResult(best, threshold, best >= threshold - tol, worst, ver.lam1_hat, ver.lam2_hat)
