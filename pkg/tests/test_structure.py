import pytest
from hypothesis import given

from conftest import structures
from sibtool.builders import disjoint_edges, path
from sibtool.errors import ParseError, StructureError
from sibtool.structure import (
    Signature,
    Structure,
    disjoint_union,
    induced_substructure,
    parse_structure,
    serialize_structure,
)


def test_parse_basic():
    m = parse_structure("# demo\nlanguage E/2 P/1\nuniverse 4\nE 0 1\n\nP 3\n")
    assert m.size == 4
    assert m.holds("E", (0, 1)) and not m.holds("E", (1, 0))
    assert m.holds("P", (3,))
    assert m.signature.names == ("E", "P")


def test_serialize_is_canonical():
    a = parse_structure("language E/2\nuniverse 3\nE 2 1\nE 0 1\n")
    b = parse_structure("language E/2\nuniverse 3\nE 0 1\nE 2 1\n")
    assert serialize_structure(a) == serialize_structure(b) == "language E/2\nuniverse 3\nE 0 1\nE 2 1\n"


def test_empty_language_round_trip():
    m = parse_structure("language\nuniverse 2\n")
    assert serialize_structure(m) == "language\nuniverse 2\n"


@pytest.mark.parametrize(
    "text, line",
    [
        ("language E/2\nuniverse 2\nE 0 2\n", 3),  # outside the universe
        ("language E/2\nuniverse 2\nE 0\n", 3),  # arity
        ("language E/2\nuniverse 2\nF 0 1\n", 3),  # unknown relation
        ("language E/2 E/1\nuniverse 2\n", 1),  # duplicate declaration
        ("universe 2\n", 1),  # missing language
        ("language E/2\nuniverse x\n", 2),
        ("language E/2\nuniverse 2\nE  0 1\n", 3),  # double space
    ],
)
def test_parse_errors_carry_location(text, line):
    with pytest.raises(ParseError) as err:
        parse_structure(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_parse_reports_column():
    with pytest.raises(ParseError) as err:
        parse_structure("language E/2\nuniverse 2\nE 0 7\n")
    assert err.value.column == 5


def test_bad_signature():
    with pytest.raises(StructureError):
        Signature([("1E", 2)])
    with pytest.raises(StructureError):
        Signature([("E", 0)])
    with pytest.raises(StructureError):
        Signature([("E", 2), ("E", 2)])


def test_structure_rejects_bad_facts():
    sig = Signature([("E", 2)])
    with pytest.raises(StructureError):
        Structure(sig, 2, [("E", (0, 5))])
    with pytest.raises(StructureError):
        Structure(sig, 2, [("F", (0, 1))])


def test_induced_and_union():
    p = path(5)
    sub = induced_substructure(p, [1, 2, 4])
    assert sub.size == 3
    assert sorted(sub.facts) == [("S", (0, 1))]
    u = disjoint_union(path(2), path(3))
    assert u.size == 5
    assert u.holds("S", (2, 3)) and not u.holds("S", (1, 2))
    with pytest.raises(StructureError):
        disjoint_union(path(2), disjoint_edges(1))


def test_automorphism_check():
    e = disjoint_edges(2)
    assert e.is_automorphism({0: 2, 2: 0, 1: 3, 3: 1})
    assert not e.is_automorphism({0: 2, 2: 0})
    with pytest.raises(StructureError):
        e.is_automorphism({0: 1})


@given(structures())
def test_round_trip(m):
    assert parse_structure(serialize_structure(m)) == m


@given(structures())
def test_relabel_inverse(m):
    perm = list(reversed(range(m.size)))
    assert m.relabel(perm).relabel(perm) == m
