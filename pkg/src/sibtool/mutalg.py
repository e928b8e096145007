"""Atomic-level mutual algebraicity, MA-connected components and
disjoint-realization packing.

Only facts with pairwise distinct entries count: loops never contribute to
multiplicity bounds and never link elements in the hypergraph.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FormulaError, StructureError
from .structure import Structure, induced_substructure


# -- bounds ------------------------------------------------------------------------


def ma_bound(m: Structure, relation: str) -> int:
    """Max over elements of the number of distinct-entry facts containing it."""
    m.signature.arity(relation)
    count = defaultdict(int)
    for tup in m.by_relation[relation]:
        if len(set(tup)) == len(tup):
            for e in tup:
                count[e] += 1
    return max(count.values(), default=0)


@dataclass(frozen=True)
class MAReport:
    bounds: dict

    def verdicts(self):
        return {name: f"bounded-with-K={k}" for name, k in self.bounds.items()}


def ma_report(m: Structure) -> MAReport:
    return MAReport({name: ma_bound(m, name) for name in m.signature.names})


@dataclass(frozen=True)
class MATrend:
    relation: str
    ts: tuple
    bounds: tuple
    verdict: str  # "bounded" or "growing"


def ma_trend(presentation, relation: str, ts: Iterable[int]) -> MATrend:
    """``ma_bound`` on successive truncations; "bounded" when constant on the
    last half of the range.  ``presentation`` only needs ``truncate(t)``."""
    ts = tuple(ts)
    if not ts:
        raise StructureError("empty t-range")
    bounds = tuple(ma_bound(presentation.truncate(t), relation) for t in ts)
    tail = bounds[len(bounds) // 2:]
    verdict = "bounded" if len(set(tail)) == 1 else "growing"
    return MATrend(relation, ts, bounds, verdict)


# -- hypergraph and components ----------------------------------------------------------


@dataclass(frozen=True)
class MAHypergraph:
    size: int
    edges: frozenset  # of frozensets with >= 2 elements


def ma_hypergraph(m: Structure) -> MAHypergraph:
    edges = set()
    for _, tup in m.facts:
        if len(set(tup)) == len(tup) and len(tup) >= 2:
            edges.add(frozenset(tup))
    return MAHypergraph(m.size, frozenset(edges))


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller root wins so components read off deterministically
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self):
        out = defaultdict(list)
        for x in self.parent:
            out[self.find(x)].append(x)
        return sorted((tuple(sorted(g)) for g in out.values()), key=lambda g: g[0])


def _components(elems, edges):
    uf = UnionFind(elems)
    for edge in edges:
        it = iter(edge)
        first = next(it)
        for e in it:
            uf.union(first, e)
    return uf.groups()


def ma_components(m: Structure) -> list[tuple[int, ...]]:
    """Connected components of the MA hypergraph, ordered by least element."""
    return _components(range(m.size), ma_hypergraph(m).edges)


def is_ma_connected(m: Structure, part: Iterable[int]) -> bool:
    """Connectivity of ``part`` using only hyperedges inside ``part``."""
    part = frozenset(part)
    m.check_elements(part)
    if not part:
        return False
    edges = [e for e in ma_hypergraph(m).edges if e <= part]
    return len(_components(sorted(part), edges)) == 1


def connected_chain(m: Structure, component: Iterable[int]) -> list[frozenset]:
    """Strictly increasing connected parts ending at ``component``: start
    from its least element and add one incident hyperedge at a time."""
    comp = frozenset(component)
    if not is_ma_connected(m, comp):
        raise StructureError("not an MA-connected part")
    edges = sorted((e for e in ma_hypergraph(m).edges if e <= comp), key=sorted)
    chain = [frozenset([min(comp)])]
    while chain[-1] != comp:
        cur = chain[-1]
        step = next(e for e in edges if e & cur and not e <= cur)
        chain.append(cur | step)
    return chain


@dataclass
class ComponentClass:
    representative: Structure
    multiplicity: int
    components: list = field(default_factory=list)


def component_census(m: Structure) -> list[ComponentClass]:
    """Components bucketed by isomorphism, in canonical order."""
    from .embed import canonical_form, is_isomorphic, structure_invariant

    buckets = defaultdict(list)
    for comp in ma_components(m):
        sub = induced_substructure(m, comp)
        buckets[structure_invariant(sub)].append((comp, sub))
    classes = []
    for key in sorted(buckets):
        local = []
        for comp, sub in buckets[key]:
            for cls in local:
                if is_isomorphic(cls.representative, sub) is not None:
                    cls.multiplicity += 1
                    cls.components.append(comp)
                    break
            else:
                local.append(ComponentClass(sub, 1, [comp]))
        for cls in local:
            cls.representative = canonical_form(cls.representative)
        classes.extend(local)
    from .structure import serialize_structure

    classes.sort(key=lambda c: (c.representative.size, serialize_structure(c.representative)))
    return classes


# -- conjunctions and packing -------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    kind: str  # "atom", "neg", "neq", "eq"
    relation: str | None
    args: tuple  # terms: ("v", i) 0-based variable, ("c", e) element

    def __str__(self):
        def t(term):
            return f"x{term[1] + 1}" if term[0] == "v" else str(term[1])

        if self.kind in ("atom", "neg"):
            s = f"{self.relation}({','.join(map(t, self.args))})"
            return "!" + s if self.kind == "neg" else s
        op = "!=" if self.kind == "neq" else "="
        return f"{t(self.args[0])}{op}{t(self.args[1])}"


@dataclass(frozen=True)
class QfConjunction:
    literals: tuple
    nvars: int

    def __str__(self):
        return " & ".join(map(str, self.literals))


_TERM = re.compile(r"x([1-9][0-9]*)\Z|(0|[1-9][0-9]*)\Z")
_ATOM = re.compile(r"(!?)([A-Za-z][A-Za-z0-9_]*)\((.*)\)\Z")


def _term(tok):
    mt = _TERM.match(tok)
    if not mt:
        raise FormulaError(f"bad term {tok!r}")
    if mt.group(1):
        return ("v", int(mt.group(1)) - 1)
    return ("c", int(mt.group(2)))


def parse_conjunction(text: str) -> QfConjunction:
    """Parse ``E(x1,x2) & !E(x1,3) & x1!=x2``; whitespace is ignored.

    ``x1=x2`` / ``x1=3`` equalities are accepted as well.
    """
    body = re.sub(r"\s+", "", text)
    if not body:
        raise FormulaError("empty formula")
    lits = []
    for chunk in body.split("&"):
        if not chunk:
            raise FormulaError(f"empty literal in {text!r}")
        ma = _ATOM.match(chunk)
        if ma:
            args = tuple(_term(a) for a in ma.group(3).split(",")) if ma.group(3) else ()
            if not args:
                raise FormulaError(f"atom without arguments: {chunk!r}")
            lits.append(Literal("neg" if ma.group(1) else "atom", ma.group(2), args))
        elif "!=" in chunk:
            lhs, rhs = chunk.split("!=", 1)
            lits.append(Literal("neq", None, (_term(lhs), _term(rhs))))
        elif "=" in chunk:
            lhs, rhs = chunk.split("=", 1)
            lits.append(Literal("eq", None, (_term(lhs), _term(rhs))))
        else:
            raise FormulaError(f"cannot parse literal {chunk!r}")
    nvars = 1 + max((i for lit in lits for kind, i in lit.args if kind == "v"), default=-1)
    if nvars == 0:
        raise FormulaError("formula mentions no variable")
    return QfConjunction(tuple(lits), nvars)


def _check_formula(m: Structure, phi: QfConjunction):
    for lit in phi.literals:
        if lit.kind in ("atom", "neg"):
            if lit.relation not in m.signature:
                raise FormulaError(f"unknown relation {lit.relation!r}")
            if m.signature.arity(lit.relation) != len(lit.args):
                raise FormulaError(f"arity mismatch in {lit}")
        for kind, v in lit.args:
            if kind == "c" and not 0 <= v < m.size:
                raise FormulaError(f"element {v} outside universe")


def _holds(m, lit, assign):
    vals = tuple(assign[v] if kind == "v" else v for kind, v in lit.args)
    if lit.kind == "atom":
        return (lit.relation, vals) in m.facts
    if lit.kind == "neg":
        return (lit.relation, vals) not in m.facts
    if lit.kind == "neq":
        return vals[0] != vals[1]
    return vals[0] == vals[1]


def realizations(m: Structure, phi: QfConjunction) -> list[tuple]:
    """All satisfying assignments with pairwise distinct entries, in
    lexicographic order."""
    if isinstance(phi, str):
        phi = parse_conjunction(phi)
    _check_formula(m, phi)
    due = defaultdict(list)  # literal checked once its last variable is bound
    for lit in phi.literals:
        last = max((v for kind, v in lit.args if kind == "v"), default=0)
        due[last].append(lit)
    out = []
    assign = []

    def extend(i):
        if i == phi.nvars:
            out.append(tuple(assign))
            return
        for e in range(m.size):
            if e in assign:
                continue
            assign.append(e)
            if all(_holds(m, lit, assign) for lit in due[i]):
                extend(i + 1)
            assign.pop()

    extend(0)
    return out


def max_disjoint_realizations(m: Structure, phi, cap: int = 32) -> int:
    """Largest family (at most ``cap``) of realizations of ``phi`` that are
    pairwise disjoint as element sets.  Exact branch and bound."""
    if cap < 1:
        raise FormulaError("cap must be at least 1")
    if isinstance(phi, str):
        phi = parse_conjunction(phi)
    reals = realizations(m, phi)
    masks = sorted({sum(1 << e for e in r) for r in reals})
    return pack_disjoint(masks, cap)


def pack_disjoint(masks: Sequence[int], cap: int) -> int:
    """Maximum number of pairwise disjoint bitmasks, capped."""
    masks = list(masks)
    if not masks:
        return 0
    # sparse-first ordering gives a strong greedy start
    masks.sort(key=lambda x: (sum(1 for y in masks if x & y), x))
    best = 0
    used = 0
    for x in masks:
        if not x & used:
            used |= x
            best += 1
    best = min(best, cap)
    if best == cap:
        return cap

    def bound(cands, chosen):
        covered = 0
        for x in cands:
            covered |= x
        return chosen + min(len(cands), bin(covered).count("1") // min(bin(x).count("1") for x in cands))

    def search(cands, chosen):
        nonlocal best
        if chosen > best:
            best = chosen
        if best >= cap or not cands or bound(cands, chosen) <= best:
            return
        x = cands[0]
        rest = cands[1:]
        search([y for y in rest if not y & x], chosen + 1)
        if best >= cap:
            return
        search(rest, chosen)

    search(masks, 0)
    return min(best, cap)
