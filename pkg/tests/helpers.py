"""Random instance generators shared by the test modules.

These draw from plain numpy and use textbook constructions, so they can act
as independent oracles for the library under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from qidlab.channel import make_channel


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pom(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Effects S^{-1/2} A_k S^{-1/2} for random PSD A_k with S their sum."""
    As = [random_density(rng, dim) for _ in range(outcomes)]
    S = sum(As)
    w, U = np.linalg.eigh(S)
    root = U @ np.diag(w**-0.5) @ U.conj().T
    return [root @ A @ root for A in As]


def entropy_oracle(matrix: np.ndarray) -> float:
    ev = np.linalg.eigvals(matrix).real
    return float(-sum(x * math.log2(x) for x in ev if x > 1e-15))


def h2(p: float) -> float:
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def ket(*amps) -> np.ndarray:
    v = np.array(amps, dtype=complex)
    return np.outer(v, v.conj())


def noiseless_bit():
    return make_channel([ket(1, 0), ket(0, 1)])


def overlap_channel(s: float):
    """Two pure qubit signals with |<psi0|psi1>| = s."""
    return make_channel([ket(1, 0), ket(s, math.sqrt(1 - s * s))])


def random_channel(rng: np.random.Generator, a: int, dim: int):
    return make_channel([random_density(rng, dim, rank=int(rng.integers(1, dim + 1))) for _ in range(a)])


def subsets(n: int):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)
