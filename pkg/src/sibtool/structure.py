"""Finite relational structures over the universe ``0..n-1``.

A :class:`Structure` is immutable: a :class:`Signature`, a size ``n`` and a
set of facts ``(relation, tuple)``.  Equality is built in and never declared
as a relation.  Facts may repeat entries (loops); only the tuples that enter
``M^(k)`` computations need pairwise distinct entries.

Text format (UTF-8, line oriented)::

    # comment lines may appear anywhere
    language E/2 P/1
    universe 4
    E 0 1
    P 3
"""

from __future__ import annotations

import re
from functools import cached_property
from itertools import permutations
from typing import Iterable, Mapping

from .errors import ParseError, StructureError

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"(0|[1-9][0-9]*)\Z")

Fact = tuple  # (relation name, tuple of elements)


class Signature:
    """Finite relational language; relations are kept sorted by name."""

    __slots__ = ("relations", "_arity", "max_arity")

    def __init__(self, relations: Iterable[tuple[str, int]] = ()):
        arity = {}
        for name, ar in relations:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise StructureError(f"invalid relation name {name!r}")
            if name in arity:
                raise StructureError(f"duplicate relation {name!r}")
            if not isinstance(ar, int) or isinstance(ar, bool) or ar < 1:
                raise StructureError(f"relation {name!r} needs a positive arity, got {ar!r}")
            arity[name] = ar
        self.relations = tuple(sorted(arity.items()))
        self._arity = arity
        self.max_arity = max(arity.values(), default=0)

    @classmethod
    def parse(cls, spec: str) -> "Signature":
        """``Signature.parse("E/2 P/1")``."""
        rels = []
        for tok in spec.split():
            name, _, ar = tok.partition("/")
            if not _INT_RE.match(ar):
                raise StructureError(f"bad relation declaration {tok!r}")
            rels.append((name, int(ar)))
        return cls(rels)

    @property
    def names(self):
        return tuple(name for name, _ in self.relations)

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise StructureError(f"unknown relation {name!r}") from None

    def __contains__(self, name):
        return name in self._arity

    def __iter__(self):
        return iter(self.relations)

    def __len__(self):
        return len(self.relations)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.relations == other.relations

    def __hash__(self):
        return hash(self.relations)

    def __repr__(self):
        return "Signature(%s)" % " ".join(f"{n}/{a}" for n, a in self.relations)


class Structure:
    """Immutable finite relational structure with universe ``range(size)``."""

    __slots__ = ("signature", "size", "facts", "__dict__")

    def __init__(self, signature: Signature, size: int, facts: Iterable[Fact] = ()):
        if not isinstance(signature, Signature):
            signature = Signature(signature)
        if not isinstance(size, int) or size < 0:
            raise StructureError(f"universe size must be a nonnegative integer, got {size!r}")
        checked = set()
        for fact in facts:
            name, tup = fact
            tup = tuple(tup)
            ar = signature.arity(name)
            if len(tup) != ar:
                raise StructureError(f"arity mismatch: {name}{tup} but {name} has arity {ar}")
            for e in tup:
                if not isinstance(e, int) or not 0 <= e < size:
                    raise StructureError(f"element {e!r} outside universe 0..{size - 1}")
            checked.add((name, tup))
        self.signature = signature
        self.size = size
        self.facts = frozenset(checked)

    # -- indexes -----------------------------------------------------------

    @cached_property
    def by_relation(self) -> dict[str, frozenset]:
        rel = {name: set() for name in self.signature.names}
        for name, tup in self.facts:
            rel[name].add(tup)
        return {name: frozenset(ts) for name, ts in rel.items()}

    @cached_property
    def incidence(self) -> tuple[tuple[Fact, ...], ...]:
        """``incidence[e]`` lists the facts mentioning ``e`` (each once)."""
        inc = [[] for _ in range(self.size)]
        for fact in sorted(self.facts):
            for e in set(fact[1]):
                inc[e].append(fact)
        return tuple(tuple(fs) for fs in inc)

    @cached_property
    def sorted_facts(self) -> tuple[Fact, ...]:
        return tuple(sorted(self.facts))

    def holds(self, name: str, tup) -> bool:
        return (name, tuple(tup)) in self.facts

    def universe(self) -> range:
        return range(self.size)

    def fact_counts(self) -> tuple[tuple[str, int], ...]:
        return tuple((name, len(ts)) for name, ts in sorted(self.by_relation.items()))

    def check_elements(self, elems: Iterable[int]) -> None:
        for e in elems:
            if not isinstance(e, int) or not 0 <= e < self.size:
                raise StructureError(f"element {e!r} outside universe 0..{self.size - 1}")

    # -- maps ----------------------------------------------------------------

    def is_automorphism(self, mapping: Mapping[int, int]) -> bool:
        """True iff the permutation moving ``mapping``'s keys (identity
        elsewhere) preserves and reflects every fact.

        ``mapping`` must describe a permutation of its own key set.
        """
        moved = {a: b for a, b in mapping.items() if a != b}
        if set(moved) != set(moved.values()):
            raise StructureError("mapping is not a permutation of its support")
        seen = set()
        for a in moved:
            for fact in self.incidence[a]:
                if fact in seen:
                    continue
                seen.add(fact)
                name, tup = fact
                image = (name, tuple(moved.get(e, e) for e in tup))
                if image not in self.facts:
                    return False
        return True

    def relabel(self, perm) -> "Structure":
        """Image structure under the bijection ``e -> perm[e]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.size)):
            raise StructureError("relabel needs a permutation of the universe")
        return Structure(
            self.signature,
            self.size,
            ((name, tuple(perm[e] for e in tup)) for name, tup in self.facts),
        )

    # -- dunder ----------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Structure)
            and self.size == other.size
            and self.signature == other.signature
            and self.facts == other.facts
        )

    def __hash__(self):
        return hash((self.signature, self.size, self.facts))

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"Structure(n={self.size}, {self.signature!r}, {len(self.facts)} facts)"


# -- text format -----------------------------------------------------------------


def _tokens(line: str, lineno: int):
    """Split on single spaces, reporting the column of any empty token."""
    col = 1
    out = []
    for tok in line.split(" "):
        if tok == "":
            raise ParseError("expected single-space separation", lineno, col)
        out.append((tok, col))
        col += len(tok) + 1
    return out


def parse_structure(text) -> Structure:
    """Parse the line-oriented structure format (``str`` or ``bytes``)."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    signature = None
    size = None
    facts = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line == "" or line.startswith("#"):
            continue
        toks = _tokens(line, lineno)
        head, _ = toks[0]
        if signature is None:
            if head != "language":
                raise ParseError("first line must be 'language NAME/ARITY ...'", lineno, 1)
            seen = set()
            rels = []
            for tok, col in toks[1:]:
                name, slash, ar = tok.partition("/")
                if not slash or not _NAME_RE.match(name) or not _INT_RE.match(ar) or int(ar) < 1:
                    raise ParseError(f"bad relation declaration {tok!r}", lineno, col)
                if name in seen:
                    raise ParseError(f"duplicate relation declaration {name!r}", lineno, col)
                seen.add(name)
                rels.append((name, int(ar)))
            signature = Signature(rels)
            continue
        if size is None:
            if head != "universe" or len(toks) != 2:
                raise ParseError("second line must be 'universe N'", lineno, 1)
            tok, col = toks[1]
            if not _INT_RE.match(tok):
                raise ParseError(f"bad universe size {tok!r}", lineno, col)
            size = int(tok)
            continue
        if head not in signature:
            raise ParseError(f"unknown relation {head!r}", lineno, 1)
        ar = signature.arity(head)
        if len(toks) - 1 != ar:
            raise ParseError(
                f"arity mismatch: {head} has arity {ar}, got {len(toks) - 1} arguments", lineno, 1
            )
        tup = []
        for tok, col in toks[1:]:
            if not _INT_RE.match(tok):
                raise ParseError(f"bad element {tok!r}", lineno, col)
            e = int(tok)
            if e >= size:
                raise ParseError(f"element {e} outside universe 0..{size - 1}", lineno, col)
            tup.append(e)
        facts.append((head, tuple(tup)))
    if signature is None:
        raise ParseError("missing 'language' line")
    if size is None:
        raise ParseError("missing 'universe' line")
    return Structure(signature, size, facts)


def serialize_structure(s: Structure) -> str:
    """Canonical text: relations by name, facts sorted by (name, tuple)."""
    lang = " ".join(f"{n}/{a}" for n, a in s.signature.relations)
    lines = [("language " + lang) if lang else "language", f"universe {s.size}"]
    for name, tup in s.sorted_facts:
        lines.append(" ".join([name, *map(str, tup)]))
    return "\n".join(lines) + "\n"


# -- constructions -----------------------------------------------------------------


def induced_substructure(s: Structure, domain: Iterable[int]) -> Structure:
    """Restrict to ``domain``, relabelled ``0..|domain|-1`` in increasing order."""
    dom = sorted(set(domain))
    s.check_elements(dom)
    index = {e: i for i, e in enumerate(dom)}
    facts = []
    for name, tup in s.facts:
        if all(e in index for e in tup):
            facts.append((name, tuple(index[e] for e in tup)))
    return Structure(s.signature, len(dom), facts)


def disjoint_union(*parts: Structure) -> Structure:
    """Disjoint union; each later part is shifted past the earlier ones."""
    if not parts:
        raise StructureError("disjoint_union needs at least one structure")
    sig = parts[0].signature
    facts = []
    offset = 0
    for p in parts:
        if p.signature != sig:
            raise StructureError(f"signature mismatch: {sig!r} vs {p.signature!r}")
        facts.extend((name, tuple(e + offset for e in tup)) for name, tup in p.facts)
        offset += p.size
    return Structure(sig, offset, facts)


def is_distinct(tup) -> bool:
    """Membership in ``M^(k)``: entries pairwise distinct."""
    return len(set(tup)) == len(tup)


def distinct_tuples(n: int, k: int):
    """All of ``M^(k)`` for a universe of size ``n``, in lexicographic order."""
    return permutations(range(n), k)
