"""Families of equal-size subsets with small pairwise intersections.

Ground sets are ``{1, ..., M}``.  Internally a subset is an ``int`` bitmask
(bit ``k-1`` for element ``k``); the public representation is a sorted tuple.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, ResourceLimit, TargetUnreachable
from .rng import stream
from .settings import get_settings


def _exact(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class FamilyParams:
    """Ground-set size ``M``, set size ``a`` and intersection ratio ``lam``.

    ``eps`` is the density with ``a = floor(eps * M)``; when built from ``a``
    directly it defaults to ``a / M``, the smallest density giving that ``a``.
    """

    M: int
    a: int
    lam: float
    eps: float

    @classmethod
    def from_eps(cls, M: int, eps: float, lam: float) -> "FamilyParams":
        a = math.floor(_exact(eps) * M)
        return cls.create(M, a, lam, eps)

    @classmethod
    def create(cls, M: int, a: int, lam: float, eps: float | None = None) -> "FamilyParams":
        if M < 1:
            raise PreconditionError("M must be positive")
        if not 0 < lam < 1:
            raise PreconditionError(f"lambda must lie in (0, 1), got {lam}")
        if not 1 <= a <= M:
            raise PreconditionError(f"set size a = {a} must satisfy 1 <= a <= M = {M}")
        if eps is None:
            eps = a / M
        if not 0 < eps < 1:
            raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
        return cls(M, a, float(lam), float(eps))

    @property
    def cap(self) -> int:
        """Largest allowed intersection: ``|A_i & A_j| < lam * a`` as an integer bound."""
        return math.ceil(_exact(self.lam) * self.a) - 1

    @property
    def precondition_value(self) -> float:
        return self.lam * math.log2(1 / self.eps - 1) if self.eps < 1 else -math.inf

    @property
    def precondition_ok(self) -> bool:
        return self.precondition_value > 2


@dataclass(frozen=True)
class FamilyBounds:
    n_guaranteed: int
    S: int
    counting_bound: int
    precondition_ok: bool


def lemma_bound(params: FamilyParams) -> FamilyBounds:
    """Guaranteed family size ``ceil(2**a / M)`` and the counting bound.

    ``S = a * C(M, a - ceil(lam a)) * 2**a`` bounds the number of ``a``-sets
    that meet a fixed family member in ``>= lam a`` points, so a maximal
    family has at least ``ceil(C(M, a) / S)`` members.  Both bounds are exact
    integers and are reported whether or not the precondition holds.
    """
    M, a = params.M, params.a
    k = math.ceil(_exact(params.lam) * a)
    S = a * math.comb(M, a - k) * 2**a
    n_guaranteed = -(-(2**a) // M)
    counting = -(-math.comb(M, a) // S)
    return FamilyBounds(n_guaranteed, S, counting, params.precondition_ok)


def to_mask(subset) -> int:
    m = 0
    for k in subset:
        m |= 1 << (k - 1)
    return m


def from_mask(mask: int) -> tuple[int, ...]:
    out, k = [], 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


@dataclass(frozen=True)
class SetFamily:
    params: FamilyParams
    sets: tuple[tuple[int, ...], ...]
    certified_maximal: bool = False
    target_reached: bool = True
    candidates_scanned: int = 0
    order: str = "lexicographic"
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def N(self) -> int:
        return len(self.sets)


def _compatible(mask: int, accepted: list[int], cap: int) -> bool:
    for s in accepted:
        if (mask & s).bit_count() > cap:
            return False
    return True


def build_family_greedy(
    params: FamilyParams,
    n_target: int | None = None,
    order: str = "lexicographic",
    seed: int = 0,
    max_candidates: int | None = None,
    strict: bool = False,
) -> SetFamily:
    """Greedy scan over ``a``-subsets, keeping each one compatible with all kept so far.

    ``order="random"`` shuffles the full candidate list when it has at most
    ``max_search`` entries; beyond that it draws random subsets (up to
    ``max_candidates`` draws) and cannot certify maximality.  A scan that
    exhausts every candidate yields a certified-maximal family.

    With ``strict`` a missed ``n_target`` raises :class:`TargetUnreachable`
    (carrying the family); otherwise ``target_reached`` is set to False.
    """
    if order not in ("lexicographic", "random"):
        raise ValueError(f"unknown candidate order {order!r}")
    cfg = get_settings()
    M, a, cap = params.M, params.a, params.cap
    total = math.comb(M, a)
    if order == "lexicographic" and total > cfg.max_search and n_target is None and max_candidates is None:
        raise ResourceLimit(f"C({M}, {a}) = {total} candidates exceed cap {cfg.max_search}")

    accepted: list[int] = []
    scanned = 0
    exhausted = False
    budget = max_candidates if max_candidates is not None else math.inf

    if order == "lexicographic":
        source = (to_mask(c) for c in itertools.combinations(range(1, M + 1), a))
    elif total <= cfg.max_search:
        combos = list(itertools.combinations(range(1, M + 1), a))
        perm = stream(seed, 0).permutation(len(combos))
        source = (to_mask(combos[k]) for k in perm)
    else:
        rng = stream(seed, 0)
        if max_candidates is None:
            budget = cfg.max_search

        def draws():
            while True:
                yield to_mask(int(x) + 1 for x in rng.choice(M, size=a, replace=False))

        source = draws()

    seen: set[int] = set()
    random_draws = order == "random" and total > cfg.max_search
    for mask in source:
        if n_target is not None and len(accepted) >= n_target:
            break
        if scanned >= budget:
            break
        scanned += 1
        if random_draws:
            if mask in seen:
                continue
            seen.add(mask)
        if _compatible(mask, accepted, cap):
            accepted.append(mask)
    else:
        exhausted = not random_draws

    sets = tuple(from_mask(m) for m in accepted)
    reached = n_target is None or len(sets) >= n_target
    family = SetFamily(
        params=params,
        sets=sets,
        certified_maximal=exhausted,
        target_reached=reached,
        candidates_scanned=scanned,
        order=order,
        seed=seed if order == "random" else None,
    )
    if strict and not reached:
        raise TargetUnreachable(f"only {len(sets)} of {n_target} sets found", family)
    return family


@dataclass(frozen=True)
class FamilyCheck:
    ok: bool
    max_intersection: int
    witness: tuple[int, int] | None


def verify_family(family: SetFamily) -> FamilyCheck:
    """Exhaustive pairwise check of sizes and intersections.

    ``witness`` is the first pair (0-based indices) attaining the maximum
    intersection.
    """
    p = family.params
    masks = [to_mask(s) for s in family.sets]
    sizes_ok = all(len(set(s)) == p.a and all(1 <= k <= p.M for k in s) for s in family.sets)
    best, witness = 0, None
    for i, j in itertools.combinations(range(len(masks)), 2):
        k = (masks[i] & masks[j]).bit_count()
        if witness is None or k > best:
            best, witness = k, (i, j)
    return FamilyCheck(sizes_ok and best <= p.cap, best, witness)


def johnson_bound(M: int, a: int, cap: int) -> int:
    """Upper bound on families of ``a``-subsets of ``[M]`` meeting pairwise in ``<= cap`` points."""
    if cap >= a:
        return math.comb(M, a)
    if cap < 0:
        return 1
    if cap == 0:
        return M // a
    return (M * johnson_bound(M - 1, a - 1, cap - 1)) // a


@dataclass(frozen=True)
class FamilyMaximum:
    """Result of the exact search.

    ``value`` is the maximum family size when ``exact``; otherwise it is the
    best proven upper bound and ``best_found`` the largest family seen.
    """

    value: int
    exact: bool
    best_found: int
    nodes: int


def brute_force_max_family(M: int, a: int, lam: float, max_nodes: int = 200_000) -> FamilyMaximum:
    """Maximum family size by branch and bound over the compatibility graph.

    Vertices are all ``a``-subsets, edges join compatible pairs, and a family
    is a clique.  Pruning uses greedy colouring bounds and the Johnson bound.
    """
    params = FamilyParams.create(M, a, lam)
    cap = params.cap
    total = math.comb(M, a)
    limit = get_settings().max_family_candidates
    if total > limit:
        raise ResourceLimit(f"C({M}, {a}) = {total} exceeds the exact-search cap {limit}")
    upper = johnson_bound(M, a, cap)
    combos = list(itertools.combinations(range(M), a))
    X = np.zeros((total, M), dtype=np.float32)
    for k, c in enumerate(combos):
        X[k, list(c)] = 1
    inter = X @ X.T
    compat = inter <= cap
    np.fill_diagonal(compat, False)
    adj = []
    for row in compat:
        packed = np.packbits(row, bitorder="little")
        adj.append(int.from_bytes(packed.tobytes(), "little"))

    best = 0
    nodes = 0
    aborted = False

    def bits(x: int):
        while x:
            low = x & -x
            yield low.bit_length() - 1
            x ^= low

    def colour_order(P: int) -> list[tuple[int, int]]:
        # greedy sequential colouring; returns (vertex, colour bound) ascending
        out, colour, U = [], 0, P
        while U:
            colour += 1
            Q = U
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                Q &= ~low & ~adj[v]
                U &= ~low
                out.append((v, colour))
        return out

    def expand(size: int, P: int) -> None:
        nonlocal best, nodes, aborted
        for v, colour in reversed(colour_order(P)):
            if aborted or best >= upper:
                return
            if size + colour <= best:
                return
            nodes += 1
            if nodes > max_nodes:
                aborted = True
                return
            newP = P & adj[v]
            if newP:
                expand(size + 1, newP)
            elif size + 1 > best:
                best = size + 1
            P &= ~(1 << v)

    expand(0, (1 << total) - 1)
    if best >= upper or not aborted:
        return FamilyMaximum(best, True, best, nodes)
    return FamilyMaximum(upper, False, best, nodes)
