"""Exchangeability and k-cliques.

Two disjoint tuples ``a, b`` of ``M^(k)`` are exchangeable when
``tp(ab / M - (a u b)) == tp(ba / M - (a u b))``; equivalently the pointwise
swap of ``a`` and ``b`` is an automorphism.  A k-clique is a non-empty set of
pairwise exchangeable tuples.  For ``k > 1`` exchangeability is not
transitive, so maximal cliques are graph cliques of a compatibility graph and
not equivalence classes.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from math import perm as n_perm
from typing import Iterable, Sequence

from .errors import CliqueError, InternalCheckError, StructureError
from .qftype import QfDiagram, qf_diagram, type_equal
from .structure import Structure, distinct_tuples

log = logging.getLogger(__name__)

DEFAULT_POOL_CAP = 10**5


def sufficiently_large_threshold(k: int, r: int) -> int:
    """Cliques strictly larger than ``2k + r`` count as sufficiently large."""
    return 2 * k + r


@dataclass(frozen=True)
class KClique:
    host: Structure
    k: int
    members: frozenset

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def carrier(self) -> frozenset:
        return frozenset(e for t in self.members for e in t)

    def sorted_members(self) -> list:
        return sorted(self.members)

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        return f"KClique(k={self.k}, size={self.size}, members={self.sorted_members()})"


@dataclass(frozen=True)
class AverageTypeTemplate:
    """Shared diagram of clique members over a parameter set, written with
    a single schematic subject ``x0..x{k-1}``."""

    diagram: QfDiagram

    @property
    def params(self):
        return self.diagram.params


def _swap_map(a, b):
    mapping = {}
    for x, y in zip(a, b):
        mapping[x] = y
        mapping[y] = x
    return mapping


def exchangeable_by_swap(m: Structure, a: Sequence[int], b: Sequence[int]) -> bool:
    """Automorphism route: disjoint and the pointwise swap is an automorphism."""
    a, b = tuple(a), tuple(b)
    if set(a) & set(b):
        return False
    return m.is_automorphism(_swap_map(a, b))


def exchangeable_by_type(m: Structure, a: Sequence[int], b: Sequence[int]) -> bool:
    """Type route: ``tp(ab/rest) == tp(ba/rest)``."""
    a, b = tuple(a), tuple(b)
    if set(a) & set(b):
        return False
    rest = frozenset(m.universe()) - set(a) - set(b)
    return type_equal(m, a + b, b + a, rest)


def exchangeable(m: Structure, a: Sequence[int], b: Sequence[int], check: bool = True) -> bool:
    """``a ~ b``.  With ``check`` the type and swap computations must agree."""
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        raise StructureError(f"length mismatch: {len(a)} vs {len(b)}")
    m.check_elements(a + b)
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise StructureError("exchangeability is defined on tuples with distinct entries")
    by_type = exchangeable_by_type(m, a, b)
    if check:
        by_swap = exchangeable_by_swap(m, a, b)
        if by_swap != by_type:
            raise InternalCheckError(f"exchangeability of {a}, {b} disagrees between routes")
    return by_type


def is_kclique(m: Structure, members: Iterable[Sequence[int]]) -> bool:
    members = [tuple(t) for t in members]
    if not members:
        return False
    k = len(members[0])
    used = set()
    for t in members:
        if len(t) != k or len(set(t)) != k:
            return False
        if used & set(t):
            return False
        used |= set(t)
    return all(exchangeable_by_swap(m, a, b) for a, b in combinations(members, 2))


def make_clique(m: Structure, members: Iterable[Sequence[int]]) -> KClique:
    """Build a :class:`KClique`, raising if the members do not verify."""
    members = frozenset(tuple(t) for t in members)
    if not members:
        raise CliqueError("a k-clique is non-empty")
    m.check_elements(e for t in members for e in t)
    if not is_kclique(m, members):
        raise CliqueError("members are not pairwise disjoint and exchangeable")
    return KClique(m, len(next(iter(members))), members)


# -- enumeration ---------------------------------------------------------------------


def default_pool(m: Structure, k: int, cap: int = DEFAULT_POOL_CAP) -> list:
    count = n_perm(m.size, k) if k <= m.size else 0
    if count > cap:
        raise CliqueError(
            f"default pool M^({k}) has {count} tuples, above the cap {cap}; supply a pool"
        )
    return list(distinct_tuples(m.size, k))


def compatibility_graph(m: Structure, pool: Sequence[tuple]) -> list[int]:
    """Adjacency bitmasks: ``i ~ j`` iff disjoint and exchangeable."""
    n = len(pool)
    adj = [0] * n
    sets = [frozenset(t) for t in pool]
    for i in range(n):
        for j in range(i + 1, n):
            if sets[i].isdisjoint(sets[j]) and exchangeable_by_swap(m, pool[i], pool[j]):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def _bits(x):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def maximal_cliques_bitset(adj: Sequence[int]) -> list[list[int]]:
    """Bron-Kerbosch with Tomita pivoting over bitmask adjacency."""
    out = []
    stack = [(0, (1 << len(adj)) - 1, 0)]
    while stack:
        r, p, x = stack.pop()
        if not p:
            if not x:
                out.append(sorted(_bits(r)))
            continue
        pivot = max(_bits(p | x), key=lambda u: (p & adj[u]).bit_count())
        for v in _bits(p & ~adj[pivot]):
            bit = 1 << v
            stack.append((r | bit, p & adj[v], x & adj[v]))
            p &= ~bit
            x |= bit
    return out


def enumerate_maximal_kcliques(m: Structure, k: int, pool: Iterable[Sequence[int]] | None = None,
                               cap: int = DEFAULT_POOL_CAP) -> list[KClique]:
    """All maximal k-cliques whose members are drawn from ``pool``.

    Maximality is inclusion-maximal within the pool.  The default pool is all
    of ``M^(k)``, guarded by ``cap``.  Output is sorted by member lists.
    """
    if not isinstance(k, int) or k < 1:
        raise CliqueError(f"k must be a positive integer, got {k!r}")
    if pool is None:
        pool = default_pool(m, k, cap)
    else:
        pool = sorted({tuple(t) for t in pool})
        for t in pool:
            if len(t) != k or len(set(t)) != k:
                raise CliqueError(f"pool tuple {t} is not in M^({k})")
            m.check_elements(t)
    if not pool:
        return []
    adj = compatibility_graph(m, pool)
    cliques = [KClique(m, k, frozenset(pool[i] for i in idx)) for idx in maximal_cliques_bitset(adj)]
    cliques.sort(key=lambda c: c.sorted_members())
    return cliques


def clique_size_census(m: Structure, k: int, pool=None, cap: int = DEFAULT_POOL_CAP) -> Counter:
    """Multiset of maximal clique sizes."""
    return Counter(c.size for c in enumerate_maximal_kcliques(m, k, pool, cap))


# -- melding and extension ---------------------------------------------------------------


def meld(m: Structure, a: KClique, b: KClique) -> KClique:
    """Union of two cliques sharing a member whose differences are disjoint."""
    if a.k != b.k:
        raise CliqueError("cliques of different tuple length")
    if not a.members & b.members:
        raise CliqueError("meld needs a shared member")
    only_a = frozenset(e for t in a.members - b.members for e in t)
    only_b = frozenset(e for t in b.members - a.members for e in t)
    if only_a & only_b:
        raise CliqueError("the members outside the intersection overlap")
    members = a.members | b.members
    if not is_kclique(m, members):
        raise InternalCheckError("melded set failed to verify as a clique")
    return KClique(m, a.k, members)


def extend_clique(m: Structure, a: KClique, check_preserved: bool = True,
                  cap: int = DEFAULT_POOL_CAP) -> tuple[Structure, KClique]:
    """Simple clique extension: adjoin one fresh member to ``a``.

    A tuple touching the fresh member ``c`` holds iff it holds after
    replacing ``c`` by a member of ``a`` disjoint from the tuple's other
    entries; by exchangeability the choice does not matter.  This is exact
    whenever ``|a|`` is at least the maximal arity.  Below that, if no such
    member exists the template member (the least one) is used, and the result
    is verified.

    With ``check_preserved``, every maximal k'-clique (k' <= k) of the old
    structure that is larger than ``2k + r`` is re-verified in the new one;
    this is skipped with a warning when the default pool exceeds ``cap``.
    """
    if a.size < 1:
        raise CliqueError("cannot extend an empty clique")
    k = a.k
    n = m.size
    fresh = tuple(range(n, n + k))
    members = a.sorted_members()
    template = members[0]
    owner = {}
    for idx, t in enumerate(members):
        for pos, e in enumerate(t):
            owner[e] = (idx, pos)

    new_facts = set(m.facts)
    candidates = set()
    for name, tup in m.facts:
        touched = {owner[e][0] for e in tup if e in owner}
        for idx in touched:
            s = members[idx]
            slots = [i for i, e in enumerate(tup) if e in s]
            for r in range(1, len(slots) + 1):
                for chosen in combinations(slots, r):
                    cand = list(tup)
                    for i in chosen:
                        cand[i] = n + s.index(tup[i])
                    candidates.add((name, tuple(cand)))
    for name, tup in candidates:
        others = {e for e in tup if e < n}
        hit = {owner[e][0] for e in others if e in owner}
        shadow = next((t for idx, t in enumerate(members) if idx not in hit), template)
        image = tuple(shadow[e - n] if e >= n else e for e in tup)
        if (name, image) in m.facts:
            new_facts.add((name, tup))
    big = Structure(m.signature, n + k, new_facts)
    new_members = a.members | {fresh}
    if not is_kclique(big, new_members):
        raise InternalCheckError(
            f"extended clique failed to verify (clique size {a.size} below arity {m.signature.max_arity}?)"
        )
    if check_preserved:
        assert_cliques_preserved(m, big, k, cap)
    return big, KClique(big, k, frozenset(new_members))


def assert_cliques_preserved(old: Structure, new: Structure, k: int, cap: int = DEFAULT_POOL_CAP) -> int:
    """Re-verify in ``new`` every sufficiently large maximal k'-clique of
    ``old`` for ``k' <= k``; returns how many were checked."""
    threshold = sufficiently_large_threshold(k, old.signature.max_arity)
    checked = 0
    for kk in range(1, k + 1):
        try:
            cliques = enumerate_maximal_kcliques(old, kk, cap=cap)
        except CliqueError as exc:
            log.warning("skipping preservation check at k'=%d: %s", kk, exc)
            continue
        for c in cliques:
            if c.size > threshold:
                checked += 1
                if not is_kclique(new, c.members):
                    raise InternalCheckError(f"sufficiently large clique {c} lost in extension")
    return checked


def average_type(m: Structure, a: KClique, params: Iterable[int]) -> AverageTypeTemplate:
    """Common diagram of the clique members over ``params``."""
    params = frozenset(params)
    m.check_elements(params)
    if a.size < 2:
        raise CliqueError("average type needs at least two members")
    if params & a.carrier:
        raise CliqueError("parameters must avoid the clique carrier")
    diagrams = {qf_diagram(m, t, params) for t in a.members}
    if len(diagrams) != 1:
        raise InternalCheckError("clique members disagree over the parameters")
    return AverageTypeTemplate(diagrams.pop())

