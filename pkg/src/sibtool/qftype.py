"""Quantifier-free types of tuples over parameter sets.

The language has bounded arity, so the quantifier-free type of ``c`` over
``A`` is fixed by the atomic facts whose arguments come from ``c`` and ``A``
together with which entries of ``c`` coincide with elements of ``A``.  Two
routes are provided and they are kept independent on purpose:

* :func:`type_equal` checks that ``c_i -> d_i`` plus the identity on ``A`` is
  a well defined partial isomorphism;
* :func:`qf_diagram` materialises a canonical fact summary whose equality is
  a tuple comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .errors import InternalCheckError, StructureError
from .structure import Structure

DEFAULT_WINDOW = 3


@dataclass(frozen=True)
class QfDiagram:
    """Canonical quantifier-free diagram of a ``subject_length``-tuple over
    ``params``.

    Pattern entries are ``("x", i)`` for subject position ``i`` and
    ``("a", e)`` for parameter element ``e``; only facts mentioning at least
    one subject position are recorded.  ``equalities`` lists
    ``(i, e)`` with subject position ``i`` equal to parameter ``e``.
    """

    subject_length: int
    params: tuple
    facts: tuple
    equalities: tuple

    def as_text(self):
        def term(t):
            return f"x{t[1]}" if t[0] == "x" else str(t[1])

        lits = [f"{name}({','.join(term(t) for t in pat)})" for name, pat in self.facts]
        lits += [f"x{i}={e}" for i, e in self.equalities]
        return " & ".join(lits) if lits else "true"


@dataclass(frozen=True)
class PermissibleSet:
    host: Structure
    array: tuple
    index: int
    permutations: frozenset

    def __contains__(self, perm):
        return tuple(perm) in self.permutations

    def __len__(self):
        return len(self.permutations)


def _check_subject(m: Structure, c: Sequence[int]) -> tuple:
    c = tuple(c)
    m.check_elements(c)
    if len(set(c)) != len(c):
        raise StructureError(f"tuple {c} has repeated entries")
    return c


def _params(m: Structure, A: Iterable[int]) -> frozenset:
    A = frozenset(A)
    m.check_elements(A)
    return A


def type_equal(m: Structure, c: Sequence[int], d: Sequence[int], A: Iterable[int] = ()) -> bool:
    """``tp(c/A) == tp(d/A)`` for quantifier-free types in ``m``."""
    c = _check_subject(m, c)
    d = _check_subject(m, d)
    if len(c) != len(d):
        raise StructureError(f"length mismatch: {len(c)} vs {len(d)}")
    A = _params(m, A)
    if c == d:
        return True
    fwd = {}
    for x, y in zip(c, d):
        fwd[x] = y
    # equality atoms x_i = a: the map must be the identity on A.
    for x, y in fwd.items():
        if (x in A or y in A) and x != y:
            return False
    dom = A | set(c)
    rng = A | set(d)
    back = {y: x for x, y in fwd.items()}
    return _maps_into(m, c, dom, fwd) and _maps_into(m, d, rng, back)


def _maps_into(m, subject, dom, fwd):
    seen = set()
    for x in subject:
        for fact in m.incidence[x]:
            if fact in seen:
                continue
            seen.add(fact)
            name, tup = fact
            if all(e in dom for e in tup):
                if (name, tuple(fwd.get(e, e) for e in tup)) not in m.facts:
                    return False
    return True


def qf_diagram(m: Structure, c: Sequence[int], A: Iterable[int] = ()) -> QfDiagram:
    """Materialised quantifier-free type of ``c`` over ``A``."""
    c = _check_subject(m, c)
    A = _params(m, A)
    pos = {e: i for i, e in enumerate(c)}
    facts = set()
    for x in c:
        for name, tup in m.incidence[x]:
            if all(e in pos or e in A for e in tup):
                pat = tuple(("x", pos[e]) if e in pos else ("a", e) for e in tup)
                facts.add((name, pat))
    eqs = tuple(sorted((i, e) for i, e in enumerate(c) if e in A))
    return QfDiagram(len(c), tuple(sorted(A)), tuple(sorted(facts)), eqs)


# -- indiscernibility ---------------------------------------------------------------


def _check_sequence(m, seq, A, window):
    if window < 2:
        raise StructureError("window must be at least 2")
    seq = [_check_subject(m, t) for t in seq]
    if seq and len({len(t) for t in seq}) != 1:
        raise StructureError("sequence tuples must share one length")
    used = set(A)
    for t in seq:
        if used & set(t):
            raise StructureError(f"tuple {t} overlaps the parameters or another tuple")
        used |= set(t)
    return seq


def _concat(seq, idx):
    out = ()
    for i in idx:
        out += seq[i]
    return out


def _indiscernible(m, seq, A, window, index_sequences):
    A = _params(m, A)
    seq = _check_sequence(m, seq, A, window)
    for length in range(1, min(window, len(seq)) + 1):
        ref = None
        for idx in index_sequences(range(len(seq)), length):
            cur = _concat(seq, idx)
            if ref is None:
                ref = cur
            elif not type_equal(m, cur, ref, A):
                return False
    return True


def is_order_indiscernible(m: Structure, seq, A: Iterable[int] = (), window: int = DEFAULT_WINDOW) -> bool:
    """Every two increasing subsequences of equal length ``<= window`` have
    the same type over ``A``."""
    return _indiscernible(m, seq, A, window, combinations)


def is_totally_indiscernible(m: Structure, seq, A: Iterable[int] = (), window: int = DEFAULT_WINDOW) -> bool:
    """As :func:`is_order_indiscernible` but over all injective index sequences."""
    return _indiscernible(m, seq, A, window, permutations)


def is_strictly_order_indiscernible(m: Structure, seq, A: Iterable[int] = (),
                                    window: int = DEFAULT_WINDOW) -> bool:
    return is_order_indiscernible(m, seq, A, window) and not is_totally_indiscernible(m, seq, A, window)


# -- permissible permutations ---------------------------------------------------------


def apply_perm(perm, tup):
    """``pi(a) = (a[pi[0]], ..., a[pi[k-1]])``."""
    return tuple(tup[i] for i in perm)


def permissible_permutations(m: Structure, array, index: int) -> PermissibleSet:
    """Permutations ``pi`` of positions with ``tp(pi(a)/M - a) == tp(a/M - a)``
    for ``a = array[index]``.

    Each answer is cross-checked against the automorphism form: permuting
    ``a`` by ``pi`` and fixing everything else is an automorphism.
    """
    array = [_check_subject(m, t) for t in array]
    used = set()
    for t in array:
        if used & set(t):
            raise StructureError("array tuples must be pairwise disjoint")
        used |= set(t)
    if not 0 <= index < len(array):
        raise StructureError(f"index {index} out of range for array of length {len(array)}")
    a = array[index]
    rest = frozenset(m.universe()) - set(a)
    perms = set()
    for pi in permutations(range(len(a))):
        by_type = type_equal(m, apply_perm(pi, a), a, rest)
        by_aut = m.is_automorphism({a[i]: a[j] for j, i in enumerate(pi)})
        if by_type != by_aut:
            raise InternalCheckError(f"permissibility of {pi} disagrees between type and automorphism checks")
        if by_type:
            perms.add(pi)
    return PermissibleSet(m, tuple(array), index, frozenset(perms))


def is_subgroup(perms, k: int) -> bool:
    """Identity present, closed under composition and inverse."""
    perms = set(perms)
    if tuple(range(k)) not in perms:
        return False
    for p in perms:
        inv = [0] * k
        for i, j in enumerate(p):
            inv[j] = i
        if tuple(inv) not in perms:
            return False
        for q in perms:
            if tuple(p[q[i]] for i in range(k)) not in perms:
                return False
    return True
