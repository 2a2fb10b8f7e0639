"""Dense finite-dimensional quantum primitives.

States, effects and POMs are thin immutable wrappers around complex numpy
arrays.  They are only created through the ``validate_*`` functions (or by
operations that preserve validity), so downstream code can trust the
invariants without re-checking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompletePOM,
    IndexOutOfRange,
    NonHermitian,
    NotAnEffect,
    NotNormalized,
    NotPSD,
    ResourceLimit,
    TraceNotOne,
)
from .settings import get_settings


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    arr.setflags(write=False)
    return arr


def eigvalsh(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted ascending."""
    return np.linalg.eigvalsh(matrix)


def hermitian_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated state on a ``dim``-dimensional space."""

    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Effect:
    """A single operator ``D`` with ``0 <= D <= 1``."""

    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"Effect(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class POM:
    """Positive operator measurement: PSD effects summing to the identity."""

    effects: tuple[np.ndarray, ...] = field(repr=False)
    labels: tuple[Hashable, ...]

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    @cached_property
    def stack(self) -> np.ndarray:
        """Effects as one ``(outcomes, dim, dim)`` array."""
        return np.stack(self.effects)

    def born_row(self, matrix: np.ndarray) -> np.ndarray:
        """``tr(matrix @ E_m)`` for every outcome ``m`` (unclamped)."""
        return np.einsum("ij,kji->k", matrix, self.stack).real

    def __repr__(self) -> str:
        return f"POM(dim={self.dim}, outcomes={len(self)})"


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability masses on ``{0, ..., len-1}``.

    Masses are either all :class:`fractions.Fraction` (exact) or floats.
    """

    masses: tuple

    def __len__(self) -> int:
        return len(self.masses)

    def __getitem__(self, k):
        return self.masses[k]

    @property
    def exact(self) -> bool:
        return all(isinstance(m, Fraction) for m in self.masses)

    def as_array(self) -> np.ndarray:
        return np.array([float(m) for m in self.masses])


def validate_distribution(masses: Iterable, tol: float | None = None) -> FiniteDistribution:
    masses = tuple(masses)
    if not masses:
        raise NotNormalized("empty distribution")
    exact = all(isinstance(m, (int, Fraction)) and not isinstance(m, bool) for m in masses)
    if exact:
        masses = tuple(Fraction(m) for m in masses)
        if any(m < 0 for m in masses):
            raise NotNormalized("negative mass")
        total = sum(masses)
        if total != 1:
            raise NotNormalized(f"masses sum to {total}", float(total))
        return FiniteDistribution(masses)
    tol = get_settings().normalization_tol if tol is None else tol
    masses = tuple(float(m) for m in masses)
    if any(m < 0 for m in masses):
        raise NotNormalized("negative mass")
    total = math.fsum(masses)
    if abs(total - 1.0) > tol:
        raise NotNormalized(f"masses sum to {total!r}", total)
    return FiniteDistribution(masses)


# ---------------------------------------------------------------- validation


def validate_density(raw, tol: float | None = None) -> DensityOperator:
    """Check Hermiticity, positivity and unit trace of ``raw``.

    Raises
    ------
    NonHermitian, NotPSD, TraceNotOne
        Carrying the offending quantity in ``.value`` (max defect, minimum
        eigenvalue, actual trace).
    """
    tol = get_settings().validation_tol if tol is None else tol
    m = np.array(raw, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {m.shape}")
    defect = hermitian_defect(m)
    if defect > tol:
        raise NonHermitian(f"matrix is not Hermitian (max defect {defect:.3g})", defect)
    m = (m + m.conj().T) / 2
    lo = float(eigvalsh(m)[0])
    if lo < -tol:
        raise NotPSD(f"matrix is not PSD (min eigenvalue {lo:.12g})", lo)
    tr = complex(np.trace(m))
    if abs(tr - 1) > tol:
        raise TraceNotOne(f"trace is {tr.real:.12g}, expected 1", tr.real)
    return DensityOperator(_frozen(m))


def validate_effect(raw, tol: float | None = None) -> Effect:
    tol = get_settings().validation_tol if tol is None else tol
    m = np.array(raw, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {m.shape}")
    defect = hermitian_defect(m)
    if defect > tol:
        raise NonHermitian(f"effect is not Hermitian (max defect {defect:.3g})", defect)
    m = (m + m.conj().T) / 2
    ev = eigvalsh(m)
    if ev[0] < -tol or ev[-1] > 1 + tol:
        raise NotAnEffect(f"effect eigenvalues outside [0, 1]: [{ev[0]:.12g}, {ev[-1]:.12g}]")
    return Effect(_frozen(m))


def validate_pom(effects, labels: Sequence[Hashable] | None = None, tol: float | None = None) -> POM:
    tol = get_settings().validation_tol if tol is None else tol
    mats = [np.array(e, dtype=complex) for e in effects]
    if not mats:
        raise IncompletePOM("a POM needs at least one effect")
    d = mats[0].shape[0] if mats[0].ndim == 2 else -1
    cleaned = []
    for k, m in enumerate(mats):
        if m.shape != (d, d) or d <= 0:
            raise DimensionMismatch(f"effect {k} has shape {m.shape}, expected ({d}, {d})")
        defect = hermitian_defect(m)
        if defect > tol:
            raise NonHermitian(f"effect {k} is not Hermitian (max defect {defect:.3g})", defect)
        m = (m + m.conj().T) / 2
        lo = float(eigvalsh(m)[0])
        if lo < -tol:
            raise NotPSD(f"effect {k} is not PSD (min eigenvalue {lo:.12g})", lo)
        cleaned.append(_frozen(m))
    gap = float(np.max(np.abs(sum(cleaned) - np.eye(d))))
    if gap > tol:
        raise IncompletePOM(f"effects do not sum to the identity (max defect {gap:.3g})", gap)
    if labels is None:
        labels = tuple(range(1, len(cleaned) + 1))
    elif len(labels) != len(cleaned):
        raise DimensionMismatch("one label per effect required")
    return POM(tuple(cleaned), tuple(labels))


# -------------------------------------------------------------- constructors


def pure_state(vector) -> DensityOperator:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityOperator(_frozen(np.outer(v, v.conj())))


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator(_frozen(np.eye(dim) / dim))


def basis_state(dim: int, k: int) -> DensityOperator:
    """``|k><k|`` with 0-based ``k``."""
    m = np.zeros((dim, dim), dtype=complex)
    m[k, k] = 1
    return DensityOperator(_frozen(m))


def basis_pom(dim: int) -> POM:
    effects = []
    for k in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[k, k] = 1
        effects.append(_frozen(m))
    return POM(tuple(effects), tuple(range(1, dim + 1)))


def trivial_pom(dim: int) -> POM:
    return POM((_frozen(np.eye(dim)),), (1,))


def product_basis_pom(dim: int, n: int) -> POM:
    """n-fold product of the computational basis measurement.

    Labels are the measured words (1-based letters); outcome order is
    lexicographic, i.e. matches the Kronecker index order.
    """
    _check_dim(dim**n)
    total = dim**n
    effects = []
    for k in range(total):
        m = np.zeros((total, total), dtype=complex)
        m[k, k] = 1
        effects.append(_frozen(m))
    labels = tuple(tuple(c + 1 for c in w) for w in itertools.product(range(dim), repeat=n))
    return POM(tuple(effects), labels)


# ---------------------------------------------------------------- operations


def _check_dim(dim: int) -> None:
    cap = get_settings().max_dim
    if dim > cap:
        raise ResourceLimit(f"dimension {dim} exceeds the configured cap {cap}")


def tensor(rho: DensityOperator, sigma: DensityOperator) -> DensityOperator:
    _check_dim(rho.dim * sigma.dim)
    return DensityOperator(_frozen(np.kron(rho.matrix, sigma.matrix)))


def tensor_all(states: Sequence[DensityOperator]) -> DensityOperator:
    """Kronecker chain; the empty chain is the scalar state 1 on dim 1."""
    _check_dim(math.prod(s.dim for s in states))
    out = np.ones((1, 1), dtype=complex)
    for s in states:
        out = np.kron(out, s.matrix)
    return DensityOperator(_frozen(out))


def pom_tensor(E: POM, F: POM) -> POM:
    _check_dim(E.dim * F.dim)
    effects = tuple(_frozen(np.kron(a, b)) for a in E.effects for b in F.effects)
    labels = tuple((la, lb) for la in E.labels for lb in F.labels)
    return POM(effects, labels)


def born(matrix: np.ndarray, effect: np.ndarray) -> float:
    """``tr(matrix @ effect)`` for Hermitian arguments, as a real number."""
    return float(np.einsum("ij,ji->", matrix, effect).real)


def measure(sigma: DensityOperator, E: POM) -> FiniteDistribution:
    """Outcome distribution of ``E`` on ``sigma``.

    Masses within the validation tolerance below zero are clamped to 0.
    """
    if sigma.dim != E.dim:
        raise DimensionMismatch(f"state dim {sigma.dim} != POM dim {E.dim}")
    row = E.born_row(sigma.matrix)
    lo = float(row.min())
    if lo < -get_settings().validation_tol:
        raise NotPSD(f"negative outcome mass {lo}", lo)
    return FiniteDistribution(tuple(float(p) for p in np.maximum(row, 0.0)))


def coarsen(E: POM, subsets: Iterable[Iterable[int]]) -> list[Effect]:
    """Sum the effects of ``E`` over each index set.

    Indices are 0-based positions in ``E.effects``.
    """
    out = []
    for subset in subsets:
        acc = np.zeros((E.dim, E.dim), dtype=complex)
        for m in subset:
            if not 0 <= m < len(E):
                raise IndexOutOfRange(f"outcome index {m} outside 0..{len(E) - 1}")
            acc = acc + E.effects[m]
        out.append(Effect(_frozen(acc)))
    return out


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Entropy in bits; eigenvalues are clamped to [0, 1] first."""
    ev = np.clip(eigvalsh(rho.matrix), 0.0, 1.0)
    ev = ev[ev > 0]
    return float(max(0.0, -np.sum(ev * np.log2(ev))))


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _masses(d) -> np.ndarray:
    if isinstance(d, FiniteDistribution):
        return d.as_array()
    return np.asarray(d, dtype=float)


def variational_distance(Q, R) -> float:
    """l1 distance between two distributions of equal support size."""
    q, r = _masses(Q), _masses(R)
    if q.shape != r.shape:
        raise DimensionMismatch(f"support sizes differ: {q.shape} vs {r.shape}")
    return math.fsum(np.abs(q - r))


def variational_distance_sup(Q, R, exhaustive: bool = False) -> float:
    """The same distance as ``2 * sup_C (Q(C) - R(C))``.

    With ``exhaustive`` every subset ``C`` is enumerated (support size <= 20),
    otherwise the maximizing set ``{x : Q(x) > R(x)}`` is used directly.
    """
    q, r = _masses(Q), _masses(R)
    if q.shape != r.shape:
        raise DimensionMismatch(f"support sizes differ: {q.shape} vs {r.shape}")
    if not exhaustive:
        return 2 * math.fsum((q - r)[q > r])
    if len(q) > 20:
        raise ResourceLimit("exhaustive sup form limited to 20 outcomes")
    best = 0.0
    for k in range(len(q) + 1):
        for C in itertools.combinations(range(len(q)), k):
            idx = list(C)
            best = max(best, math.fsum(q[idx]) - math.fsum(r[idx]))
    return 2 * best
