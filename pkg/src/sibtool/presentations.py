"""Finite descriptions of countable structures and their sibling behaviour.

Three kinds of presentation are supported, each a JSON document:

* ``cellular``: a finite base plus families of k-tuples; every fact is given
  by a pattern over the base, one member, or an ordered pair of members;
* ``grid``: labelled k-cliques with fresh witness elements and a relation
  ``R`` that sees the lower clique of each label pair but not the higher one;
* ``chain``: a strictly increasing chain of MA-connected components plus a
  finite background.

``truncate(t)`` builds the finite structure keeping ``t`` members per
infinite family (or clique, or chain link).  All checks in this module run on
truncations.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Iterable, Sequence

import jsonschema

from .cliques import enumerate_maximal_kcliques, is_kclique, sufficiently_large_threshold
from .embed import find_embedding
from .errors import InternalCheckError, PresentationError
from .mutalg import is_ma_connected
from .qftype import type_equal
from .structure import Signature, Structure, induced_substructure

SCHEMA_VERSION = 1
MAX_SHADOW_LABELS = 3

_PATTERN = {
    "type": "array",
    "items": {
        "type": "array",
        "minItems": 2,
        "maxItems": 2,
        "prefixItems": [{"type": "string"}, {"type": "array", "items": {"type": "string"}, "minItems": 1}],
    },
}
_STRUCT = {
    "type": "object",
    "required": ["size", "facts"],
    "properties": {
        "size": {"type": "integer", "minimum": 0},
        "facts": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "prefixItems": [{"type": "string"}, {"type": "array", "items": {"type": "integer"}}],
            },
        },
    },
    "additionalProperties": False,
}

PRESENTATION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "kind", "language"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": ["cellular", "grid", "chain"]},
        "language": {"type": "array", "items": {"type": "string", "pattern": r"^[A-Za-z][A-Za-z0-9_]*/[1-9][0-9]*$"}},
        "base": _STRUCT,
        "families": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "k", "count"],
                "properties": {
                    "name": {"type": "string", "pattern": r"^[A-Za-z][A-Za-z0-9_]*$"},
                    "k": {"type": "integer", "minimum": 1},
                    "count": {"oneOf": [{"type": "integer", "minimum": 0}, {"const": "infinite"}]},
                    "internal": _PATTERN,
                    "base": _PATTERN,
                    "cross": _PATTERN,
                    "cross_family": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["family", "facts"],
                            "properties": {"family": {"type": "string"}, "facts": _PATTERN},
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "extra_facts": _PATTERN,
        "k": {"type": "integer", "minimum": 1},
        "relation": {"type": "string"},
        "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "internal": _PATTERN,
        "base_facts": _PATTERN,
        "cross": _PATTERN,
        "other_cross": _PATTERN,
        "label_fresh": {"type": "integer", "minimum": 0},
        "label_facts": _PATTERN,
        "pair_fresh": {"type": "integer", "minimum": 0},
        "pair_facts": _PATTERN,
        "witness": {"type": "array", "items": {"type": "string"}},
        "chain": {"type": "array", "items": _STRUCT},
        "background": {"type": "array", "items": _STRUCT},
        "infinite": {"type": "boolean"},
        "description": {"type": "string"},
    },
    "additionalProperties": False,
}


class Verdict(Enum):
    ONE = "1"
    ALEPH0 = "aleph0"
    CONTINUUM = "continuum"


@dataclass(frozen=True)
class SiblingVerdict:
    verdict: Verdict
    justification: str


@dataclass
class ValidationReport:
    valid: bool
    t: int
    checks: int = 0
    problems: list = field(default_factory=list)

    def add(self, ok: bool, problem: str):
        self.checks += 1
        if not ok:
            self.valid = False
            self.problems.append(problem)


# -- patterns ------------------------------------------------------------------------------

_TERM = re.compile(r"([a-z])([0-9]+)\Z")


@dataclass(frozen=True)
class Pattern:
    relation: str
    terms: tuple  # (kind, index)

    def kinds(self):
        return {k for k, _ in self.terms}

    def to_json(self):
        return [self.relation, [f"{k}{i}" for k, i in self.terms]]

    def instantiate(self, env):
        """``env`` maps a kind letter to a sequence of elements."""
        return (self.relation, tuple(env[k][i] for k, i in self.terms))


def _parse_patterns(raw, signature: Signature, bounds: dict, where: str, require=()) -> tuple:
    out = []
    for item in raw or ():
        name, terms = item
        if name not in signature:
            raise PresentationError(f"{where}: unknown relation {name!r}")
        if signature.arity(name) != len(terms):
            raise PresentationError(f"{where}: {name} has arity {signature.arity(name)}, got {len(terms)} terms")
        parsed = []
        for tok in terms:
            mt = _TERM.match(tok)
            if not mt or mt.group(1) not in bounds:
                raise PresentationError(f"{where}: bad term {tok!r} (allowed kinds: {sorted(bounds)})")
            kind, idx = mt.group(1), int(mt.group(2))
            if idx >= bounds[kind]:
                raise PresentationError(f"{where}: term {tok!r} out of range (< {bounds[kind]})")
            parsed.append((kind, idx))
        pat = Pattern(name, tuple(parsed))
        for kind in require:
            if kind not in pat.kinds():
                raise PresentationError(f"{where}: pattern {item} must mention a {kind!r} term")
        out.append(pat)
    return tuple(out)


def _struct_from_json(raw, signature) -> Structure:
    try:
        return Structure(signature, raw["size"], ((n, tuple(t)) for n, t in raw["facts"]))
    except Exception as exc:  # StructureError and shape errors alike
        raise PresentationError(f"bad structure: {exc}") from exc


def _struct_to_json(s: Structure):
    return {"size": s.size, "facts": [[n, list(t)] for n, t in s.sorted_facts]}


def _language(signature: Signature):
    return [f"{n}/{a}" for n, a in signature]


# -- cellular -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    name: str
    k: int
    count: int | None  # None means infinitely many members
    internal: tuple = ()
    base: tuple = ()
    cross: tuple = ()
    cross_family: tuple = ()  # of (other family name, patterns)

    @property
    def infinite(self):
        return self.count is None

    def members_at(self, t: int) -> int:
        return t if self.count is None else min(self.count, t)

    def to_json(self):
        return {
            "name": self.name,
            "k": self.k,
            "count": "infinite" if self.count is None else self.count,
            "internal": [p.to_json() for p in self.internal],
            "base": [p.to_json() for p in self.base],
            "cross": [p.to_json() for p in self.cross],
            "cross_family": [{"family": o, "facts": [p.to_json() for p in pats]} for o, pats in self.cross_family],
        }


@dataclass
class Instance:
    """A truncation together with where every member landed."""

    structure: Structure
    base: tuple
    members: dict  # family or label name -> list of member tuples
    fresh: dict = field(default_factory=dict)  # label -> tuple, or (label, label) -> tuple


class CellularPresentation:
    kind = "cellular"

    def __init__(self, signature: Signature, base: Structure, families: Sequence[Family], extra_facts=()):
        self.signature = signature
        self.base = base
        self.families = tuple(families)
        self.extra_facts = tuple(extra_facts)
        names = [f.name for f in self.families]
        if len(set(names)) != len(names):
            raise PresentationError("family names must be distinct")
        self._index = {f.name: i for i, f in enumerate(self.families)}
        for f in self.families:
            for other, _ in f.cross_family:
                if other not in self._index or other == f.name:
                    raise PresentationError(f"family {f.name}: bad cross-family reference {other!r}")

    @property
    def max_k(self):
        return max((f.k for f in self.families), default=1)

    def default_t(self):
        return sufficiently_large_threshold(self.max_k, self.signature.max_arity) + 1

    def instantiate(self, t: int) -> Instance:
        if t < 0:
            raise PresentationError("t must be non-negative")
        nb = self.base.size
        facts = set(self.base.facts)
        base = tuple(range(nb))
        members = {}
        nxt = nb
        for f in self.families:
            ms = []
            for _ in range(f.members_at(t)):
                ms.append(tuple(range(nxt, nxt + f.k)))
                nxt += f.k
            members[f.name] = ms
        for f in self.families:
            ms = members[f.name]
            for m in ms:
                env = {"p": m, "b": base}
                facts.update(p.instantiate(env) for p in f.internal + f.base)
            for m1, m2 in product(ms, ms):
                if m1 != m2:
                    env = {"p": m1, "q": m2, "b": base}
                    facts.update(p.instantiate(env) for p in f.cross)
            for other, pats in f.cross_family:
                for m1, m2 in product(ms, members[other]):
                    env = {"p": m1, "q": m2, "b": base}
                    facts.update(p.instantiate(env) for p in pats)
        for name, terms in self.extra_facts:
            tup = []
            for term in terms:
                if isinstance(term, int):
                    tup.append(term)
                else:
                    fam, j, pos = term
                    if j >= len(members[fam]):
                        break
                    tup.append(members[fam][j][pos])
            else:
                facts.add((name, tuple(tup)))
        return Instance(Structure(self.signature, nxt, facts), base, members)

    def truncate(self, t: int) -> Structure:
        return self.instantiate(t).structure

    def validate(self, t: int | None = None) -> ValidationReport:
        """Every transposition of two members of one family must be an
        automorphism of the truncation."""
        t = max(3, self.default_t() if t is None else t)
        inst = self.instantiate(t)
        m = inst.structure
        report = ValidationReport(True, t)
        for f in self.families:
            ms = inst.members[f.name]
            for (j1, a), (j2, b) in combinations(enumerate(ms), 2):
                swap = {}
                for x, y in zip(a, b):
                    swap[x], swap[y] = y, x
                bad = violating_fact(m, swap)
                report.add(bad is None, f"family {f.name}: swapping members {j1} and {j2} is not an automorphism; "
                                        f"violating fact {bad}")
        return report

    def is_separated(self, t: int | None = None) -> bool:
        t = self.default_t() if t is None else t
        return not _offending(self.instantiate(t), [(f.name, f.k) for f in self.families])

    def to_json(self):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "language": _language(self.signature),
            "base": _struct_to_json(self.base),
            "families": [f.to_json() for f in self.families],
        }
        if self.extra_facts:
            doc["extra_facts"] = [[n, [_extra_term_json(x) for x in terms]] for n, terms in self.extra_facts]
        return doc

    @classmethod
    def from_json(cls, doc, signature: Signature):
        base = _struct_from_json(doc.get("base", {"size": 0, "facts": []}), signature)
        raw_fams = doc.get("families", [])
        ks = {rf["name"]: rf["k"] for rf in raw_fams}
        fams = []
        for rf in raw_fams:
            k, name = rf["k"], rf["name"]
            count = None if rf["count"] == "infinite" else rf["count"]
            where = f"family {name}"
            internal = _parse_patterns(rf.get("internal"), signature, {"p": k}, where + " internal")
            basep = _parse_patterns(rf.get("base"), signature, {"p": k, "b": base.size}, where + " base", "p")
            cross = _parse_patterns(rf.get("cross"), signature, {"p": k, "q": k, "b": base.size}, where + " cross", "pq")
            cf = []
            for entry in rf.get("cross_family", []):
                other = entry["family"]
                if other not in ks:
                    raise PresentationError(f"{where}: unknown family {other!r}")
                bounds = {"p": k, "q": ks[other], "b": base.size}
                cf.append((other, _parse_patterns(entry["facts"], signature, bounds, where + " cross_family", "pq")))
            fams.append(Family(name, k, count, internal, basep, cross, tuple(cf)))
        extra = []
        for name, terms in doc.get("extra_facts", []):
            if name not in signature or signature.arity(name) != len(terms):
                raise PresentationError(f"extra fact {name}{terms}: bad relation or arity")
            extra.append((name, tuple(_extra_term(x, base.size, ks) for x in terms)))
        return cls(signature, base, fams, extra)


def violating_fact(m: Structure, mapping: dict):
    """A fact whose image (or preimage) under the permutation ``mapping``
    is missing, or ``None`` when ``mapping`` is an automorphism."""
    inv = {y: x for x, y in mapping.items()}
    for fwd in (mapping, inv):
        for name, tup in m.sorted_facts:
            image = (name, tuple(fwd.get(e, e) for e in tup))
            if image not in m.facts:
                return f"{name}({','.join(map(str, tup))})"
    return None


def _extra_term(tok, nbase, ks):
    mt = re.match(r"b([0-9]+)\Z", tok)
    if mt:
        e = int(mt.group(1))
        if e >= nbase:
            raise PresentationError(f"extra fact term {tok!r} outside the base")
        return e
    parts = tok.split(".")
    if len(parts) != 3 or parts[0] not in ks or not parts[1].isdigit() or not parts[2].isdigit():
        raise PresentationError(f"bad extra fact term {tok!r}; use b# or family.member.position")
    if int(parts[2]) >= ks[parts[0]]:
        raise PresentationError(f"extra fact term {tok!r}: position out of range")
    return (parts[0], int(parts[1]), int(parts[2]))


def _extra_term_json(x):
    return f"b{x}" if isinstance(x, int) else f"{x[0]}.{x[1]}.{x[2]}"


# -- separation --------------------------------------------------------------------------------


def _offending(inst: Instance, parts):
    """First (family, positions) whose restriction to a proper subset of
    positions is itself a clique; ``None`` when separated."""
    m = inst.structure
    for name, k in parts:
        ms = inst.members[name]
        if k < 2 or len(ms) < 2:
            continue
        for size in range(1, k):
            for sub in combinations(range(k), size):
                if is_kclique(m, [tuple(x[i] for i in sub) for x in ms]):
                    return name, sub
    return None


def separate(p: CellularPresentation, t: int | None = None) -> CellularPresentation:
    """Split families until no proper subset of positions forms a clique.

    Runs on the truncation at ``t`` (default ``2k + r + 1``) and re-reads the
    patterns of the split families from it; the result truncates to the same
    structure up to renumbering.
    """
    t = p.default_t() if t is None else t
    report = p.validate(t)
    if not report.valid:
        raise PresentationError("cannot separate an invalid presentation: " + "; ".join(report.problems[:3]))
    inst = p.instantiate(t)
    parts = [(f.name, f.k, f.count, inst.members[f.name]) for f in p.families]
    changed = False
    while True:
        view = Instance(inst.structure, inst.base, {n: ms for n, _, _, ms in parts})
        hit = _offending(view, [(n, k) for n, k, _, _ in parts])
        if hit is None:
            break
        changed = True
        name, sub = hit
        i = next(i for i, part in enumerate(parts) if part[0] == name)
        _, k, count, ms = parts[i]
        rest = tuple(x for x in range(k) if x not in sub)
        taken = {n for n, _, _, _ in parts}
        n1, n2 = _fresh_name(name, sub, taken), None
        taken.add(n1)
        n2 = _fresh_name(name, rest, taken)
        parts[i:i + 1] = [
            (n1, len(sub), count, [tuple(x[j] for j in sub) for x in ms]),
            (n2, len(rest), count, [tuple(x[j] for j in rest) for x in ms]),
        ]
    if not changed:
        return p
    return _extract(p, inst, parts, t)


def _fresh_name(name, positions, taken):
    cand = f"{name}_{''.join(map(str, positions))}"
    while cand in taken:
        cand += "_"
    return cand


def _extract(p, inst, parts, t):
    m = inst.structure
    nb = len(inst.base)
    where = {}
    for pi, (_, _, _, ms) in enumerate(parts):
        for j, tup in enumerate(ms):
            for pos, e in enumerate(tup):
                where[e] = (pi, j, pos)
    internal = [set() for _ in parts]
    basep = [set() for _ in parts]
    cross = [set() for _ in parts]
    cfam = [dict() for _ in parts]
    for name, tup in m.facts:
        touched = sorted({where[e][:2] for e in tup if e in where})
        if not touched:
            continue
        pis = [x[0] for x in touched]

        def term(e, roles):
            if e not in where:
                return ("b", e)
            pi, j, pos = where[e]
            return (roles[(pi, j)], pos)

        if touched == [(pis[0], 0)]:
            pat = Pattern(name, tuple(term(e, {touched[0]: "p"}) for e in tup))
            (basep if "b" in pat.kinds() else internal)[pis[0]].add(pat)
        elif len(touched) == 2 and pis[0] == pis[1] and touched == [(pis[0], 0), (pis[0], 1)]:
            roles = {touched[0]: "p", touched[1]: "q"}
            cross[pis[0]].add(Pattern(name, tuple(term(e, roles) for e in tup)))
        elif len(touched) == 2 and pis[0] != pis[1] and touched[0][1] == 0 and touched[1][1] == 0:
            roles = {touched[0]: "p", touched[1]: "q"}
            cfam[pis[0]].setdefault(parts[pis[1]][0], set()).add(Pattern(name, tuple(term(e, roles) for e in tup)))
    fams = []
    for pi, (name, k, count, _) in enumerate(parts):
        fams.append(Family(
            name, k, count,
            tuple(sorted(internal[pi], key=_pkey)),
            tuple(sorted(basep[pi], key=_pkey)),
            tuple(sorted(cross[pi], key=_pkey)),
            tuple((o, tuple(sorted(pats, key=_pkey))) for o, pats in sorted(cfam[pi].items())),
        ))
    base = induced_substructure(m, range(nb))
    out = CellularPresentation(p.signature, base, fams)
    # same structure up to renumbering, element by element
    new_inst = out.instantiate(t)
    relabel = list(range(m.size))
    for name, _, _, ms in parts:
        for old, new in zip(ms, new_inst.members[name]):
            for x, y in zip(old, new):
                relabel[x] = y
    if new_inst.structure.size != m.size or m.relabel(relabel) != new_inst.structure:
        raise PresentationError("separated families cannot be written with member and pair patterns")
    return out


def _pkey(pat):
    return (pat.relation, pat.terms)


def is_finitely_partitioned(p: CellularPresentation, t: int | None = None) -> bool:
    """True iff after separation every infinite family has ``k = 1``.

    Finite families are part of a finite kernel and do not count.
    """
    q = separate(p, t)
    return all(f.k == 1 for f in q.families if f.infinite)


# -- grids ------------------------------------------------------------------------------------------

_WITNESS = re.compile(r"(lo|hi)\.([0-9]+)\.([0-9]+)\Z|([fgeb])([0-9]+)\Z")


class GridPresentation:
    """Labelled k-cliques ``A_q`` with witnesses ``d_{q,r}`` for ``q < r``:
    ``R(a, d_{q,r})`` holds for members of ``A_q`` and fails for members of
    ``A_r``.

    Elements per label: the clique, then ``label_fresh`` fresh elements.  Each
    pair ``q < r`` of labels gets ``pair_fresh`` further fresh elements.
    Pattern terms: ``p``/``q`` member positions, ``f``/``g`` fresh elements
    of the lower/higher (or own) label, ``e`` pair-fresh elements, ``b``
    base elements.
    """

    kind = "grid"

    def __init__(self, signature, base, k, relation, labels, internal=(), base_facts=(), cross=(),
                 other_cross=(), label_fresh=0, label_facts=(), pair_fresh=0, pair_facts=(), witness=()):
        self.signature = signature
        self.base = base
        self.k = k
        self.relation = relation
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise PresentationError("grid labels must be distinct")
        if relation not in signature:
            raise PresentationError(f"unknown relation {relation!r}")
        self.internal = tuple(internal)
        self.base_facts = tuple(base_facts)
        self.cross = tuple(cross)
        self.other_cross = tuple(other_cross)
        self.label_fresh = label_fresh
        self.label_facts = tuple(label_facts)
        self.pair_fresh = pair_fresh
        self.pair_facts = tuple(pair_facts)
        self.witness = tuple(witness)
        if signature.arity(relation) != k + len(self.witness):
            raise PresentationError(
                f"{relation} must have arity k + len(witness) = {k + len(self.witness)}"
            )
        self._witness_terms = tuple(self._parse_witness(w) for w in self.witness)

    def _parse_witness(self, tok):
        mt = _WITNESS.match(tok)
        if not mt:
            raise PresentationError(f"bad witness term {tok!r}")
        if mt.group(1):
            pos = int(mt.group(3))
            if pos >= self.k:
                raise PresentationError(f"witness term {tok!r}: position out of range")
            return (mt.group(1), int(mt.group(2)), pos)
        kind, idx = mt.group(4), int(mt.group(5))
        bound = {"f": self.label_fresh, "g": self.label_fresh, "e": self.pair_fresh, "b": self.base.size}[kind]
        if idx >= bound:
            raise PresentationError(f"witness term {tok!r} out of range")
        return (kind, idx)

    @property
    def rank(self) -> int:
        """Witness entries outside the base and the cliques."""
        return sum(1 for w in self._witness_terms if w[0] in "fge")

    @property
    def threshold(self) -> int:
        return sufficiently_large_threshold(self.k, self.signature.max_arity)

    def default_t(self):
        return self.threshold + 1

    def instantiate(self, t: int, sizes: dict | None = None) -> Instance:
        sizes = dict(sizes or {})
        for lab in sizes:
            if lab not in self.labels:
                raise PresentationError(f"unknown label {lab!r}")
        base = tuple(range(self.base.size))
        facts = set(self.base.facts)
        nxt = self.base.size
        members, fresh = {}, {}
        for lab in self.labels:
            ms = []
            for _ in range(sizes.get(lab, t)):
                ms.append(tuple(range(nxt, nxt + self.k)))
                nxt += self.k
            members[lab] = ms
            fresh[lab] = tuple(range(nxt, nxt + self.label_fresh))
            nxt += self.label_fresh
        for q, r in combinations(self.labels, 2):
            fresh[(q, r)] = tuple(range(nxt, nxt + self.pair_fresh))
            nxt += self.pair_fresh
        for lab in self.labels:
            ms = members[lab]
            for a in ms:
                env = {"p": a, "b": base, "f": fresh[lab]}
                facts.update(p.instantiate(env) for p in self.internal + self.base_facts)
            for a, c in product(ms, ms):
                if a != c:
                    facts.update(p.instantiate({"p": a, "q": c, "b": base}) for p in self.cross)
            facts.update(_expand(self.label_facts, {"p": ms}, {"f": fresh[lab], "b": base}))
        for q, r in combinations(self.labels, 2):
            for a, c in product(members[q], members[r]):
                facts.update(p.instantiate({"p": a, "q": c, "b": base}) for p in self.other_cross)
            fixed = {"e": fresh[(q, r)], "f": fresh[q], "g": fresh[r], "b": base}
            facts.update(_expand(self.pair_facts, {"p": members[q], "q": members[r]}, fixed))
        return Instance(Structure(self.signature, nxt, facts), base, members, fresh)

    def truncate(self, t: int, sizes: dict | None = None) -> Structure:
        return self.instantiate(t, sizes).structure

    def witness_tuple(self, inst: Instance, q, r) -> tuple:
        out = []
        for w in self._witness_terms:
            if w[0] in ("lo", "hi"):
                out.append(inst.members[q if w[0] == "lo" else r][w[1]][w[2]])
            elif w[0] == "b":
                out.append(w[1])
            elif w[0] == "e":
                out.append(inst.fresh[(q, r)][w[1]])
            else:
                out.append(inst.fresh[q if w[0] == "f" else r][w[1]])
        return tuple(out)

    def validate(self, t: int | None = None) -> ValidationReport:
        t = max(3, self.default_t() if t is None else t)
        for w in self._witness_terms:
            if w[0] in ("lo", "hi") and w[1] >= t:
                raise PresentationError("witness member index must be below t")
        inst = self.instantiate(t)
        m = inst.structure
        report = ValidationReport(True, t)
        for lab in self.labels:
            report.add(is_kclique(m, inst.members[lab]), f"clique {lab} is not a {self.k}-clique")
        for q, r in combinations(self.labels, 2):
            d = self.witness_tuple(inst, q, r)
            report.add(all(m.holds(self.relation, a + d) for a in inst.members[q]),
                       f"{self.relation}(a, d) fails for a member of {q} (pair {q},{r})")
            report.add(not any(m.holds(self.relation, a + d) for a in inst.members[r]),
                       f"{self.relation}(a, d) holds for a member of {r} (pair {q},{r})")
        # order-preserving maps between label subsets must be partial isomorphisms
        for size in range(1, min(MAX_SHADOW_LABELS, len(self.labels)) + 1):
            subsets = list(combinations(self.labels, size))
            ref = _shadow_tuple(inst, subsets[0])
            for sub in subsets[1:]:
                ok = type_equal(m, _shadow_tuple(inst, sub), ref, inst.base)
                report.add(ok, f"labels {list(sub)} and {list(subsets[0])} are not isomorphic in order")
        return report

    def to_json(self):
        def pats(ps):
            return [p.to_json() for p in ps]

        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "language": _language(self.signature),
            "base": _struct_to_json(self.base),
            "k": self.k,
            "relation": self.relation,
            "labels": list(self.labels),
            "internal": pats(self.internal),
            "base_facts": pats(self.base_facts),
            "cross": pats(self.cross),
            "other_cross": pats(self.other_cross),
            "label_fresh": self.label_fresh,
            "label_facts": pats(self.label_facts),
            "pair_fresh": self.pair_fresh,
            "pair_facts": pats(self.pair_facts),
            "witness": list(self.witness),
        }

    @classmethod
    def from_json(cls, doc, signature):
        for key in ("k", "relation", "labels", "witness"):
            if key not in doc:
                raise PresentationError(f"grid presentation needs {key!r}")
        base = _struct_from_json(doc.get("base", {"size": 0, "facts": []}), signature)
        k, nb = doc["k"], base.size
        lf, pf = doc.get("label_fresh", 0), doc.get("pair_fresh", 0)

        def parse(key, bounds, require=""):
            return _parse_patterns(doc.get(key), signature, bounds, key, require)

        return cls(
            signature, base, k, doc["relation"], doc["labels"],
            internal=parse("internal", {"p": k, "f": lf}),
            base_facts=parse("base_facts", {"p": k, "b": nb, "f": lf}, "p"),
            cross=parse("cross", {"p": k, "q": k, "b": nb}, "pq"),
            other_cross=parse("other_cross", {"p": k, "q": k, "b": nb}, "pq"),
            label_fresh=lf,
            label_facts=parse("label_facts", {"p": k, "f": lf, "b": nb}),
            pair_fresh=pf,
            pair_facts=parse("pair_facts", {"p": k, "q": k, "e": pf, "f": lf, "g": lf, "b": nb}),
            witness=doc["witness"],
        )


def _expand(patterns, ranging, fixed):
    """Instantiate patterns whose ``ranging`` kinds iterate over members."""
    out = set()
    for pat in patterns:
        kinds = [k for k in ranging if k in pat.kinds()]
        for choice in product(*(ranging[k] for k in kinds)):
            env = dict(fixed)
            env.update(zip(kinds, choice))
            out.add(pat.instantiate(env))
    return out


def _shadow_tuple(inst, labels):
    out = ()
    for lab in labels:
        for a in inst.members[lab]:
            out += a
        out += inst.fresh[lab]
    for q, r in combinations(labels, 2):
        out += inst.fresh[(q, r)]
    return out


# -- chains -----------------------------------------------------------------------------------------


class ComponentChainSpec:
    """Chain ``C_0 < C_1 < ...`` of MA-connected components (each embeds in
    the next, never back) plus finitely many background components."""

    kind = "chain"

    def __init__(self, signature, chain: Sequence[Structure], background: Sequence[Structure] = (),
                 infinite: bool = True):
        self.signature = signature
        self.chain = tuple(chain)
        self.background = tuple(background)
        self.infinite = infinite
        for s in self.chain + self.background:
            if s.signature != signature:
                raise PresentationError("chain component in a different language")

    def truncate(self, t: int) -> Structure:
        return _union(self.signature, list(self.background) + list(self.chain[: t + 1]))

    def validate(self, t: int | None = None) -> ValidationReport:
        report = ValidationReport(True, len(self.chain) if t is None else t)
        if not self.chain:
            report.add(False, "empty chain")
            return report
        for i, c in enumerate(self.chain):
            report.add(is_ma_connected(c, c.universe()), f"chain link {i} is not MA-connected")
        for i in range(len(self.chain) - 1):
            a, b = self.chain[i], self.chain[i + 1]
            report.add(find_embedding(a, b) is not None, f"link {i} does not embed into link {i + 1}")
            report.add(find_embedding(b, a) is None, f"link {i + 1} embeds back into link {i}")
        for i, c in enumerate(self.background):
            report.add(c.size > 0 and is_ma_connected(c, c.universe()), f"background component {i} is not MA-connected")
            report.add(all(find_embedding(c, x) is None for x in self.chain),
                       f"background component {i} embeds into a chain link")
        return report

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "language": _language(self.signature),
            "chain": [_struct_to_json(s) for s in self.chain],
            "background": [_struct_to_json(s) for s in self.background],
            "infinite": self.infinite,
        }

    @classmethod
    def from_json(cls, doc, signature):
        chain = [_struct_from_json(x, signature) for x in doc.get("chain", [])]
        background = [_struct_from_json(x, signature) for x in doc.get("background", [])]
        return cls(signature, chain, background, doc.get("infinite", True))


def _union(signature, parts):
    facts, off = [], 0
    for s in parts:
        facts.extend((n, tuple(e + off for e in tup)) for n, tup in s.facts)
        off += s.size
    return Structure(signature, off, facts)


# -- documents ------------------------------------------------------------------------------------

_KINDS = {"cellular": CellularPresentation, "grid": GridPresentation, "chain": ComponentChainSpec}


def presentation_from_json(doc):
    try:
        jsonschema.validate(doc, PRESENTATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise PresentationError(f"schema violation at {path}: {exc.message}") from exc
    try:
        signature = Signature(tuple((x.split("/")[0], int(x.split("/")[1])) for x in doc["language"]))
    except Exception as exc:
        raise PresentationError(f"bad language: {exc}") from exc
    return _KINDS[doc["kind"]].from_json(doc, signature)


def load_presentation(path) -> CellularPresentation | GridPresentation | ComponentChainSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PresentationError(f"{path}: invalid JSON: {exc}") from exc
    return presentation_from_json(doc)


def dump_presentation(p, path=None) -> str:
    text = json.dumps(p.to_json(), indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# -- classification ---------------------------------------------------------------------------------


def classify(p, t: int | None = None) -> SiblingVerdict:
    """Number of siblings up to isomorphism: 1, aleph_0 or continuum."""
    report = p.validate(t)
    if not report.valid:
        raise PresentationError("invalid presentation: " + "; ".join(report.problems[:3]))
    if isinstance(p, ComponentChainSpec):
        if not p.infinite:
            return SiblingVerdict(Verdict.ONE, "finite structure: bi-embeddable finite structures are isomorphic")
        return SiblingVerdict(
            Verdict.CONTINUUM,
            "infinitely many MA-connected components in a strictly increasing chain: "
            "choosing which links occur gives continuum many siblings",
        )
    if isinstance(p, GridPresentation):
        return SiblingVerdict(
            Verdict.CONTINUUM,
            f"grid of rank {p.rank}: cutting cliques to chosen sizes gives continuum many siblings",
        )
    if all(not f.infinite for f in p.families):
        return SiblingVerdict(Verdict.ONE, "finite structure: bi-embeddable finite structures are isomorphic")
    if is_finitely_partitioned(p, t):
        return SiblingVerdict(Verdict.ONE, "cellular and finitely partitioned: the structure is its only sibling")
    return SiblingVerdict(
        Verdict.ALEPH0,
        "cellular, not finitely partitioned: stranding members of a separated family with k > 1 "
        "gives infinitely many siblings, and cellular structures have countably many",
    )


# -- generators -------------------------------------------------------------------------------------


def generate_Nf(g: GridPresentation, f: dict, t: int, verify: bool = True) -> Structure:
    """Truncation with the cliques of the labels in ``f`` cut to the given sizes.

    Sizes must be distinct and above ``2k + r``; ``t`` must exceed them all.
    The maximal k-clique census over member tuples is checked against
    ``f`` plus ``t`` for every uncut label.
    """
    if not isinstance(g, GridPresentation):
        raise PresentationError("N_f needs a grid presentation")
    sizes = {}
    for lab, v in f.items():
        if lab not in g.labels:
            raise PresentationError(f"unknown label {lab!r}")
        if not isinstance(v, int) or v <= g.threshold:
            raise PresentationError(f"size for {lab!r} must be an integer above {g.threshold}")
        sizes[lab] = v
    if len(set(sizes.values())) != len(sizes):
        raise PresentationError("cut sizes must be pairwise distinct")
    if sizes and t <= max(sizes.values()):
        raise PresentationError("t must exceed every cut size")
    inst = g.instantiate(t, sizes)
    if verify:
        pool = [a for lab in g.labels for a in inst.members[lab]]
        got = Counter(c.size for c in enumerate_maximal_kcliques(inst.structure, g.k, pool=pool))
        want = Counter(sizes.get(lab, t) for lab in g.labels)
        if got != want:
            raise InternalCheckError(f"clique census {dict(got)} differs from the cut sizes {dict(want)}")
    return inst.structure


@dataclass
class StrandResult:
    structure: Structure
    clique_size: int
    stranded: tuple
    removed_families: tuple


def generate_Mstar_ell(p: CellularPresentation, family: int | str, ell: int, t: int) -> StrandResult:
    """Keep only the first entry of members ``0..ell`` of a family with
    ``k > 1`` and drop every 1-family exchangeable with those stranded
    elements.  Reports the size of the maximal 1-clique of the stranded
    elements, which lies in ``[ell, |base| + ell + 1]``."""
    if isinstance(family, int):
        if not 0 <= family < len(p.families):
            raise PresentationError(f"family index {family} out of range")
        fam = p.families[family]
    else:
        fam = next((f for f in p.families if f.name == family), None)
        if fam is None:
            raise PresentationError(f"unknown family {family!r}")
    if fam.k < 2:
        raise PresentationError("stranding needs a family with k > 1")
    if ell < 0 or ell >= fam.members_at(t):
        raise PresentationError(f"ell must lie in [0, {fam.members_at(t) - 1}]")
    if not p.validate(t).valid:
        raise PresentationError("presentation is invalid")
    if not p.is_separated(t):
        raise PresentationError("presentation is not separated; run separate first")
    inst = p.instantiate(t)
    ms = inst.members[fam.name]
    drop = {e for a in ms[: ell + 1] for e in a[1:]}
    keep = [e for e in range(inst.structure.size) if e not in drop]
    m_ell = induced_substructure(inst.structure, keep)
    new_of = {e: i for i, e in enumerate(keep)}
    stranded = tuple(new_of[a[0]] for a in ms[: ell + 1])
    removed = []
    for other in p.families:
        if other is fam or other.k != 1 or not inst.members[other.name]:
            continue
        cand = [(s,) for s in stranded] + [(new_of[a[0]],) for a in inst.members[other.name]]
        if is_kclique(m_ell, cand):
            removed.append(other.name)
    gone = {new_of[a[0]] for name in removed for a in inst.members[name]}
    final_keep = [i for i in range(m_ell.size) if i not in gone]
    out = induced_substructure(m_ell, final_keep)
    idx = {e: i for i, e in enumerate(final_keep)}
    stranded = tuple(idx[s] for s in stranded)
    anchor = stranded[0]
    clique = {anchor} | {x for x in range(out.size) if x != anchor and is_kclique(out, [(anchor,), (x,)])}
    if not set(stranded) <= clique:
        raise InternalCheckError("stranded elements are not mutually exchangeable")
    size = len(clique)
    if not ell <= size <= p.base.size + ell + 1:
        raise InternalCheckError(f"stranded clique has size {size}, outside [{ell}, {p.base.size + ell + 1}]")
    return StrandResult(out, size, stranded, tuple(removed))


def generate_NS(c: ComponentChainSpec, S: Iterable[int], t: int) -> Structure:
    """Background plus the chain links with index in ``S`` and at most ``t``."""
    S = sorted(set(S))
    for i in S:
        if not isinstance(i, int) or i < 0 or i >= len(c.chain):
            raise PresentationError(f"chain index {i} out of range [0, {len(c.chain) - 1}]")
    return _union(c.signature, list(c.background) + [c.chain[i] for i in S if i <= t])


# -- built-in grids -----------------------------------------------------------------------------------


def builtin_grid(rank: int, k: int, labels: Sequence[str] = ("a", "b", "c", "d")) -> GridPresentation:
    """Small valid grids of rank 0 or 1 with k = 1 or 2."""
    P = Pattern
    if (rank, k) == (0, 1):
        sig = Signature([("E", 2)])
        return GridPresentation(
            sig, Structure(sig, 0), 1, "E", labels,
            internal=[P("E", (("p", 0), ("p", 0)))],
            cross=[P("E", (("p", 0), ("q", 0)))],
            witness=["lo.0.0"],
        )
    if (rank, k) == (0, 2):
        sig = Signature([("H", 2), ("R", 3)])
        return GridPresentation(
            sig, Structure(sig, 0), 2, "R", labels,
            internal=[P("H", (("p", 0), ("p", 1))), P("R", (("p", 0), ("p", 1), ("p", 0)))],
            cross=[P("R", (("p", 0), ("p", 1), ("q", 0)))],
            witness=["lo.0.0"],
        )
    if (rank, k) == (1, 1):
        sig = Signature([("R", 2), ("U", 1), ("V", 1)])
        return GridPresentation(
            sig, Structure(sig, 0), 1, "R", labels,
            internal=[P("U", (("p", 0),))],
            label_fresh=1,
            label_facts=[P("V", (("f", 0),)), P("R", (("p", 0), ("f", 0)))],
            witness=["f0"],
        )
    if (rank, k) == (1, 2):
        sig = Signature([("H", 2), ("R", 3), ("V", 1)])
        return GridPresentation(
            sig, Structure(sig, 0), 2, "R", labels,
            internal=[P("H", (("p", 0), ("p", 1)))],
            label_fresh=1,
            label_facts=[P("V", (("f", 0),)), P("R", (("p", 0), ("p", 1), ("f", 0)))],
            witness=["f0"],
        )
    raise PresentationError(f"no built-in grid of rank {rank} with k = {k}")
