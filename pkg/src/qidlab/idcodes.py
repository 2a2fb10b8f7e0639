"""Identification codes built from a transmission code and a set family."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .channel import CQChannel, WordDistribution, word_state
from .core import POM, Effect, coarsen
from .errors import DimensionMismatch, InvariantViolation, SizeMismatch
from .families import SetFamily
from .rng import stream
from .settings import get_settings
from .transmission import QCode


@dataclass(frozen=True, eq=False)
class SimQIDCode:
    """Simultaneous ID code: every decision effect is a sum over one common POM.

    ``subsets`` hold 0-based outcome indices of ``base_pom``.
    """

    n: int
    base_pom: POM
    subsets: tuple[tuple[int, ...], ...]
    inputs: tuple[WordDistribution, ...]

    def __post_init__(self):
        if len(self.subsets) != len(self.inputs):
            raise SizeMismatch("one outcome subset per message required")

    @property
    def N(self) -> int:
        return len(self.inputs)

    def effects(self) -> list[Effect]:
        return coarsen(self.base_pom, self.subsets)


@dataclass(frozen=True, eq=False)
class QIDCodeGeneral:
    n: int
    inputs: tuple[WordDistribution, ...]
    effects: tuple[Effect, ...]

    def __post_init__(self):
        if len(self.effects) != len(self.inputs):
            raise SizeMismatch("one effect per message required")

    @property
    def N(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True)
class IDVerification:
    lam1_hat: float
    lam2_hat: float
    first_kind: tuple[float, ...]
    worst_pair: tuple[int, int] | None
    matrix: np.ndarray | None = field(default=None, repr=False)
    sampled: bool = False
    pairs_checked: int = 0


def build_simultaneous_id_code(code: QCode, family: SetFamily) -> SimQIDCode:
    """Message ``i`` sends a uniformly random codeword from ``{c_m : m in A_i}``
    and accepts on the sum of the decoder effects ``E_m, m in A_i``.
    """
    if family.params.M != code.M:
        raise SizeMismatch(f"family ground set has {family.params.M} elements, code has {code.M} codewords")
    a = family.params.a
    inputs, subsets = [], []
    for A in family.sets:
        if len(A) != a:
            raise SizeMismatch(f"family set {A} does not have size {a}")
        mass: dict = {}
        for m in A:
            w = code.codewords[m - 1]
            mass[w] = mass.get(w, Fraction(0)) + Fraction(1, a)
        inputs.append(WordDistribution(tuple(mass), tuple(mass.values())))
        subsets.append(tuple(m - 1 for m in A))
    return SimQIDCode(code.n, code.decoder, tuple(subsets), tuple(inputs))


def _acceptance_table(ch: CQChannel, code, words: list) -> np.ndarray:
    """``T[x, j] = W^n_x(D_j)`` for every word in ``words``."""
    if isinstance(code, SimQIDCode):
        if code.base_pom.dim != ch.dim**code.n:
            raise DimensionMismatch(f"POM dim {code.base_pom.dim} != {ch.dim}**{code.n}")
        B = np.array([code.base_pom.born_row(word_state(ch, w).matrix) for w in words])
        indicator = np.zeros((len(code.base_pom), code.N))
        for j, A in enumerate(code.subsets):
            indicator[list(A), j] = 1.0
        return B @ indicator
    for e in code.effects:
        if e.dim != ch.dim**code.n:
            raise DimensionMismatch(f"effect dim {e.dim} != {ch.dim}**{code.n}")
    stack = np.stack([e.matrix for e in code.effects])
    return np.array([np.einsum("ij,kji->k", word_state(ch, w).matrix, stack).real for w in words])


def acceptance_matrix(ch: CQChannel, code: SimQIDCode | QIDCodeGeneral) -> np.ndarray:
    """``A[i, j] = P_i W^n(D_j)``.

    Exact rational input masses are applied as integer weights over a common
    denominator, so noiseless instances come out exact.
    """
    words = sorted({w for P in code.inputs for w in P.words})
    index = {w: k for k, w in enumerate(words)}
    T = _acceptance_table(ch, code, words)
    out = np.empty((code.N, code.N))
    for i, P in enumerate(code.inputs):
        rows = T[[index[w] for w in P.words]]
        if P.exact:
            den = math.lcm(*(m.denominator for m in P.masses))
            weights = np.array([float(m * den) for m in P.masses])
            out[i] = (weights @ rows) / den
        else:
            out[i] = P.mass_array() @ rows
    return out


def verify_id_code(
    ch: CQChannel,
    code: SimQIDCode | QIDCodeGeneral,
    full_matrix: bool = False,
    sampled_pairs: int | None = None,
    seed: int = 0,
) -> IDVerification:
    """Both error kinds of an ID code, computed exactly by the Born rule.

    With ``sampled_pairs`` only that many random off-diagonal pairs enter
    ``lam2_hat``, which is then an estimate (``sampled=True``).
    """
    A = acceptance_matrix(ch, code)
    tol = get_settings().validation_tol
    if A.size and (A.min() < -tol or A.max() > 1 + tol):
        raise InvariantViolation("acceptance probability outside [0, 1]")
    N = code.N
    first = tuple(float(A[i, i]) for i in range(N))
    lam1 = max(0.0, 1.0 - min(first))
    worst, lam2, checked = None, 0.0, 0
    if N >= 2:
        if sampled_pairs is None:
            off = A.copy()
            np.fill_diagonal(off, -np.inf)
            flat = int(np.argmax(off))
            worst = divmod(flat, N)
            lam2 = float(off[worst])
            checked = N * (N - 1)
        else:
            rng = stream(seed, 0)
            i = rng.integers(0, N, size=sampled_pairs)
            j = (i + rng.integers(1, N, size=sampled_pairs)) % N
            vals = A[i, j]
            k = int(np.argmax(vals))
            worst, lam2, checked = (int(i[k]), int(j[k])), float(vals[k]), sampled_pairs
    lam2 = min(1.0, max(0.0, lam2))
    return IDVerification(
        lam1_hat=lam1,
        lam2_hat=lam2,
        first_kind=first,
        worst_pair=None if worst is None else (int(worst[0]), int(worst[1])),
        matrix=A if full_matrix else None,
        sampled=sampled_pairs is not None,
        pairs_checked=checked,
    )


def proposition_error_bounds(lam: float) -> tuple[float, float]:
    """Error guarantees ``(lam, 2 lam)`` of the construction from an ``(n, M, lam)`` code."""
    return lam, 2 * lam


def id_error_level(lam1: float, lam2: float) -> float:
    """Transmission error level ``min(lam1, lam2 / 2)`` that meets both targets."""
    return min(lam1, lam2 / 2)


@dataclass(frozen=True)
class SizeBound:
    exponent: int
    value: int | Fraction
    trivial: bool


def size_bound_proposition(n: int, capacity: float, delta: float, eps: float) -> SizeBound:
    """``2 ** (floor(eps * 2 ** ((capacity - delta) n)) - n)`` as an exact number.

    Rational inputs are read through their decimal representation; an
    integral exponent ``(capacity - delta) n`` is evaluated exactly, other
    exponents with a precision that grows with their size.
    """
    rate = (Fraction(str(capacity)) - Fraction(str(delta))) * n
    e = Fraction(str(eps))
    if rate.denominator == 1:
        inner = math.floor(e * Fraction(2) ** int(rate)) if rate >= 0 else math.floor(e / 2 ** int(-rate))
    else:
        digits = max(50, int(abs(rate) * 0.302) + 40)
        with localcontext() as ctx:
            ctx.prec = digits
            val = Decimal(e.numerator) / Decimal(e.denominator) * (Decimal(2) ** (Decimal(rate.numerator) / Decimal(rate.denominator)))
            inner = int(val.to_integral_value(rounding="ROUND_FLOOR"))
    k = inner - n
    value: int | Fraction = 2**k if k >= 0 else Fraction(1, 2 ** (-k))
    return SizeBound(k, value, k <= 0)


def general_from_simultaneous(code: SimQIDCode) -> QIDCodeGeneral:
    return QIDCodeGeneral(code.n, code.inputs, tuple(code.effects()))

