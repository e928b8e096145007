"""Embeddings, isomorphism, canonical forms and age comparison.

An embedding is an injective map ``f`` with ``R(a) <-> R(f(a))`` for every
relation and every tuple of the source.  Search is plain backtracking with
degree filters and forward checking; every witness is re-validated before it
is returned.
"""

from __future__ import annotations

import os
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from math import factorial
from typing import Sequence

from .errors import InternalCheckError, SearchTimeout, StructureError
from .structure import Structure, induced_substructure, serialize_structure

DEFAULT_TIME_GUARD = 10.0
CANONICAL_LIMIT = 40320  # labelings tried before canonical_form gives up on exactness
AGE_GUARD = 5


def default_time_guard() -> float:
    raw = os.environ.get("SIBTOOL_TIME_GUARD_SECS")
    if raw:
        try:
            return float(raw)
        except ValueError:
            pass
    return DEFAULT_TIME_GUARD


@dataclass(frozen=True)
class EmbeddingWitness:
    source: Structure
    target: Structure
    mapping: tuple  # mapping[i] is the image of source element i

    def __getitem__(self, i):
        return self.mapping[i]

    def validate(self) -> bool:
        return is_embedding(self.source, self.target, self.mapping)


def is_embedding(a: Structure, b: Structure, mapping: Sequence[int]) -> bool:
    """Direct check of the definition."""
    mapping = tuple(mapping)
    if a.signature != b.signature or len(mapping) != a.size:
        return False
    if len(set(mapping)) != len(mapping) or any(not 0 <= y < b.size for y in mapping):
        return False
    for name, tup in a.facts:
        if (name, tuple(mapping[e] for e in tup)) not in b.facts:
            return False
    inv = {y: x for x, y in enumerate(mapping)}
    for name, tup in b.facts:
        if all(e in inv for e in tup):
            if (name, tuple(inv[e] for e in tup)) not in a.facts:
                return False
    return True


# -- per-element invariants -----------------------------------------------------------


def _self_profile(s: Structure, e: int):
    """Facts whose only entry is ``e`` (unary facts, loops); must match exactly."""
    return frozenset((name, len(tup)) for name, tup in s.incidence[e] if set(tup) == {e})


def _degree_profile(s: Structure, e: int) -> Counter:
    """Counts of facts through ``e`` keyed by relation and equality pattern."""
    out = Counter()
    for name, tup in s.incidence[e]:
        if set(tup) != {e}:
            out[(name, tuple(i for i, x in enumerate(tup) if x == e))] += 1
    return out


def _neighbours(s: Structure):
    nb = [set() for _ in range(s.size)]
    for _, tup in s.facts:
        for x in tup:
            nb[x].update(tup)
    for x in range(s.size):
        nb[x].discard(x)
    return nb


def _dominated(small: Counter, big: Counter) -> bool:
    return all(big[key] >= v for key, v in small.items())


class _Search:
    def __init__(self, a: Structure, b: Structure, guard: float, exact_degrees: bool):
        self.a, self.b = a, b
        self.deadline = time.monotonic() + guard
        self.guard = guard
        self.nodes = 0
        self.b_nb = _neighbours(b)
        a_nb = _neighbours(a)
        b_self = [_self_profile(b, y) for y in range(b.size)]
        b_deg = [_degree_profile(b, y) for y in range(b.size)]
        self.domains = []
        for x in range(a.size):
            sp, dp = _self_profile(a, x), _degree_profile(a, x)
            if exact_degrees:
                ok = [y for y in range(b.size) if b_self[y] == sp and b_deg[y] == dp]
            else:
                ok = [y for y in range(b.size) if b_self[y] == sp and _dominated(dp, b_deg[y])]
            self.domains.append(ok)
        self.order = self._variable_order(a_nb)
        pos = {x: i for i, x in enumerate(self.order)}
        # facts of x whose entries were all placed no later than x
        self.back = []
        self.anchor = []
        for i, x in enumerate(self.order):
            self.back.append([f for f in a.incidence[x] if all(pos[e] <= i for e in f[1])])
            earlier = [u for u in a_nb[x] if pos[u] < i]
            self.anchor.append(min(earlier, key=lambda u: pos[u]) if earlier else None)

    def _variable_order(self, nb):
        a = self.a
        left = set(range(a.size))
        order = []
        placed = set()
        while left:
            # most links into the placed set, then smallest domain, then most neighbours
            x = min(left, key=lambda v: (-len(nb[v] & placed), len(self.domains[v]), -len(nb[v]), v))
            order.append(x)
            placed.add(x)
            left.discard(x)
        return order

    def run(self):
        a, b = self.a, self.b
        if any(not d for d in self.domains):
            return None
        image = [None] * a.size
        used = set()

        def consistent(i, x, y):
            image[x] = y
            for name, tup in self.back[i]:
                if (name, tuple(image[e] for e in tup)) not in b.facts:
                    image[x] = None
                    return False
            # the back facts map injectively, so equal counts give reflection
            count = 0
            for name, tup in b.incidence[y]:
                if all(e == y or e in used for e in tup):
                    count += 1
            image[x] = None
            return count == len(self.back[i])

        def step(i):
            self.nodes += 1
            if self.nodes & 1023 == 0 and time.monotonic() > self.deadline:
                raise SearchTimeout(f"embedding search exceeded {self.guard}s")
            if i == a.size:
                return True
            x = self.order[i]
            anchor = self.anchor[i]
            if anchor is not None:
                pool = self.b_nb[image[anchor]]
                cands = [y for y in self.domains[x] if y in pool and y not in used]
            else:
                cands = [y for y in self.domains[x] if y not in used]
            for y in cands:
                if consistent(i, x, y):
                    image[x] = y
                    used.add(y)
                    if step(i + 1):
                        return True
                    used.discard(y)
                    image[x] = None
            return False

        if step(0):
            return tuple(image)
        return None


def find_embedding(a: Structure, b: Structure, time_guard: float | None = None) -> EmbeddingWitness | None:
    """An embedding of ``a`` into ``b`` or ``None``.  Raises
    :class:`SearchTimeout` instead of answering when the guard is exceeded."""
    if a.signature != b.signature:
        raise StructureError("embedding between structures of different languages")
    if a.size > b.size:
        return None
    guard = default_time_guard() if time_guard is None else time_guard
    # an injective map between equal finite universes is onto, so degrees
    # must then match exactly
    mapping = _Search(a, b, guard, exact_degrees=a.size == b.size).run()
    return _witness(a, b, mapping)


def _witness(a, b, mapping):
    if mapping is None:
        return None
    w = EmbeddingWitness(a, b, mapping)
    if not w.validate():
        raise InternalCheckError("embedding search produced an invalid witness")
    return w


def structure_invariant(s: Structure):
    """Isomorphism invariant used for bucketing and fast rejection."""
    degs = sorted(
        (tuple(sorted(_self_profile(s, e))), tuple(sorted(_degree_profile(s, e).items())))
        for e in range(s.size)
    )
    from .mutalg import ma_components

    comps = tuple(sorted(len(c) for c in ma_components(s)))
    return (s.size, s.fact_counts(), tuple(degs), comps)


def is_isomorphic(a: Structure, b: Structure, time_guard: float | None = None) -> EmbeddingWitness | None:
    """An isomorphism (as a bijective embedding) or ``None``."""
    if a.signature != b.signature:
        raise StructureError("isomorphism between structures of different languages")
    if a.size != b.size or len(a.facts) != len(b.facts):
        return None
    if structure_invariant(a) != structure_invariant(b):
        return None
    guard = default_time_guard() if time_guard is None else time_guard
    mapping = _Search(a, b, guard, exact_degrees=True).run()
    return _witness(a, b, mapping)


# -- canonical forms ---------------------------------------------------------------------


def refined_cells(s: Structure) -> list[list[int]]:
    """Ordered partition from colour refinement.  Colours are computed from
    isomorphism-invariant data only, so the cell order is canonical."""
    colour = {e: (_self_profile_key(s, e),) for e in range(s.size)}
    rank = _ranks(colour)
    while True:
        sig = {}
        for e in range(s.size):
            around = sorted(
                (name, tuple((x == e, rank[x]) for x in tup)) for name, tup in s.incidence[e]
            )
            sig[e] = (rank[e], tuple(around))
        new = _ranks(sig)
        if len(set(new.values())) == len(set(rank.values())):
            break
        rank = new
    cells = defaultdict(list)
    for e, c in rank.items():
        cells[c].append(e)
    return [cells[c] for c in sorted(cells)]


def _self_profile_key(s, e):
    return tuple(sorted(_self_profile(s, e)))


def _ranks(colour):
    keys = sorted(set(colour.values()))
    index = {k: i for i, k in enumerate(keys)}
    return {e: index[c] for e, c in colour.items()}


def _labelled_facts(s, new_of):
    return tuple(sorted((name, tuple(new_of[e] for e in tup)) for name, tup in s.facts))


def canonical_form(s: Structure, limit: int = CANONICAL_LIMIT) -> Structure:
    """Isomorphism-invariant relabelling of ``s``.

    Lexicographically least fact list over all labellings that respect the
    refined cells.  When there are more than ``limit`` such labellings the
    refined relabelling is returned instead and ``is_canonical`` reports
    ``False``; callers then fall back to :func:`is_isomorphic`.
    """
    return _canonical(s, limit)[0]


def is_canonical_exact(s: Structure, limit: int = CANONICAL_LIMIT) -> bool:
    return _canonical(s, limit)[1]


def _canonical(s, limit):
    cells = refined_cells(s)
    total = 1
    for c in cells:
        total *= factorial(len(c))
    if total > limit:
        order = [e for c in cells for e in c]
        new_of = [0] * s.size
        for i, e in enumerate(order):
            new_of[e] = i
        return Structure(s.signature, s.size, _labelled_facts(s, new_of)), False
    best = None
    for choice in product(*(permutations(c) for c in cells)):
        order = [e for block in choice for e in block]
        new_of = [0] * s.size
        for i, e in enumerate(order):
            new_of[e] = i
        facts = _labelled_facts(s, new_of)
        if best is None or facts < best:
            best = facts
    return Structure(s.signature, s.size, best or ()), True


def canonical_key(s: Structure) -> str | None:
    """Serialization of the exact canonical form, or ``None`` when too large."""
    form, exact = _canonical(s, CANONICAL_LIMIT)
    return serialize_structure(form) if exact else None


# -- census ------------------------------------------------------------------------------


@dataclass
class CensusBlock:
    representative: str
    members: list = field(default_factory=list)
    sub_blocks: list = field(default_factory=list)


@dataclass
class CensusPartition:
    blocks: list

    def as_lists(self):
        return [b.members for b in self.blocks]


def bi_embeddable(a: Structure, b: Structure, time_guard: float | None = None) -> bool:
    return find_embedding(a, b, time_guard) is not None and find_embedding(b, a, time_guard) is not None


def census(structures: Sequence[Structure], time_guard: float | None = None) -> CensusPartition:
    """Partition by mutual embeddability, each block split by isomorphism.

    For finite structures the two coincide; a mismatch is an internal error.
    """
    blocks: list[CensusBlock] = []
    reps: list[Structure] = []
    for idx, s in enumerate(structures):
        for block, rep in zip(blocks, reps):
            if rep.signature == s.signature and rep.size == s.size and bi_embeddable(rep, s, time_guard):
                block.members.append(idx)
                for sub in block.sub_blocks:
                    if is_isomorphic(structures[sub[0]], s, time_guard) is not None:
                        sub.append(idx)
                        break
                else:
                    block.sub_blocks.append([idx])
                break
        else:
            blocks.append(CensusBlock("", [idx], [[idx]]))
            reps.append(s)
    for block, rep in zip(blocks, reps):
        if len(block.sub_blocks) != 1:
            raise InternalCheckError("mutually embeddable finite structures that are not isomorphic")
        block.representative = serialize_structure(canonical_form(rep))
    blocks.sort(key=lambda b: (len(b.representative), b.representative, b.members))
    return CensusPartition(blocks)


# -- ages --------------------------------------------------------------------------------


def age_up_to(s: Structure, size: int) -> dict[int, frozenset]:
    """Canonical forms of induced substructures, grouped by size ``1..size``."""
    out = {}
    seen = {}
    for j in range(1, size + 1):
        forms = set()
        for dom in combinations(range(s.size), j):
            sub = induced_substructure(s, dom)
            key = sub.sorted_facts
            if key not in seen:
                seen[key] = canonical_key(sub)
            forms.add(seen[key])
        out[j] = frozenset(forms)
    return out


def same_age_up_to(a: Structure, b: Structure, size: int, guard: int = AGE_GUARD) -> bool:
    """Whether ``a`` and ``b`` have the same finite substructures of
    cardinality at most ``size``, up to isomorphism."""
    if size > guard:
        raise StructureError(f"age comparison size {size} is above the guard {guard}")
    if size < 0:
        raise StructureError("size must be non-negative")
    if a.signature != b.signature:
        raise StructureError("age comparison between different languages")
    return age_up_to(a, size) == age_up_to(b, size)
