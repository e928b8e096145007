"""Small standard structures used by tests, demos and the CLI."""

from __future__ import annotations

import random
from itertools import permutations

from .structure import Signature, Structure, disjoint_union

E2 = Signature([("E", 2)])
S2 = Signature([("S", 2)])


def empty_structure(n: int, signature: Signature | None = None) -> Structure:
    return Structure(signature if signature is not None else Signature(), n)


def path(n: int, relation: str = "S") -> Structure:
    """Directed path ``R(i, i+1)`` for ``i < n-1``."""
    return Structure(Signature([(relation, 2)]), n, ((relation, (i, i + 1)) for i in range(n - 1)))


def eqrel(classes, relation: str = "E") -> Structure:
    """Equivalence relation (reflexive, symmetric, transitive) with the given
    class sizes; classes occupy consecutive blocks of the universe."""
    facts = []
    start = 0
    for size in classes:
        block = range(start, start + size)
        facts.extend((relation, (a, b)) for a in block for b in block)
        start += size
    return Structure(Signature([(relation, 2)]), start, facts)


def disjoint_edges(m: int, relation: str = "E", symmetric: bool = True) -> Structure:
    """``m`` disjoint edges ``{2i, 2i+1}``."""
    facts = []
    for i in range(m):
        facts.append((relation, (2 * i, 2 * i + 1)))
        if symmetric:
            facts.append((relation, (2 * i + 1, 2 * i)))
    return Structure(Signature([(relation, 2)]), 2 * m, facts)


def complete_graph(n: int, relation: str = "E") -> Structure:
    """Symmetric irreflexive clique on ``n`` vertices."""
    return Structure(Signature([(relation, 2)]), n, ((relation, p) for p in permutations(range(n), 2)))


def edges_and_clique(m: int, c: int, relation: str = "E") -> Structure:
    """``m`` disjoint symmetric edges followed by a ``c``-vertex graph clique."""
    return disjoint_union(disjoint_edges(m, relation), complete_graph(c, relation))


def linear_order(n: int, relation: str = "L") -> Structure:
    """Strict order ``L(i, j)`` iff ``i < j``."""
    return Structure(
        Signature([(relation, 2)]), n, ((relation, (i, j)) for i in range(n) for j in range(i + 1, n))
    )


def random_structure(rng: random.Random, n: int, signature: Signature, density: float = 0.3,
                     symmetric: bool = False, loops: bool = True) -> Structure:
    """Random facts, each candidate tuple kept with probability ``density``.

    With ``symmetric`` every binary fact is added together with its reverse.
    """
    facts = set()
    for name, ar in signature:
        cands = _all_tuples(n, ar)
        for tup in cands:
            if not loops and len(set(tup)) < len(tup):
                continue
            if symmetric and ar == 2 and tup[0] > tup[1]:
                continue
            if rng.random() < density:
                facts.add((name, tup))
                if symmetric and ar == 2:
                    facts.add((name, tup[::-1]))
    return Structure(signature, n, facts)


def random_relabel(s: Structure, rng: random.Random) -> Structure:
    perm = list(range(s.size))
    rng.shuffle(perm)
    return s.relabel(perm)


def _all_tuples(n, ar):
    if ar == 0:
        return [()]
    out = [()]
    for _ in range(ar):
        out = [t + (e,) for t in out for e in range(n)]
    return out
