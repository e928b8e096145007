from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import structures
from sibtool.builders import disjoint_edges, empty_structure, eqrel, linear_order, path
from sibtool.errors import StructureError
from sibtool.qftype import (
    apply_perm,
    is_order_indiscernible,
    is_strictly_order_indiscernible,
    is_subgroup,
    is_totally_indiscernible,
    permissible_permutations,
    qf_diagram,
    type_equal,
)
from sibtool.structure import Signature, Structure

TWO_CLASSES = eqrel([2, 2])


def test_type_equal_examples():
    assert type_equal(empty_structure(3), (0,), (1,), {2})
    assert not type_equal(TWO_CLASSES, (0,), (2,), {1})
    assert type_equal(TWO_CLASSES, (0, 1), (0, 1), {2, 3})


def test_type_equal_equalities_with_parameters():
    m = empty_structure(3)
    assert not type_equal(m, (0,), (1,), {0})
    assert type_equal(m, (0,), (0,), {0})


def test_type_equal_errors():
    with pytest.raises(StructureError):
        type_equal(TWO_CLASSES, (0,), (1, 2))
    with pytest.raises(StructureError):
        type_equal(TWO_CLASSES, (0,), (9,))
    with pytest.raises(StructureError):
        type_equal(TWO_CLASSES, (0, 0), (1, 2))


def test_diagram_examples():
    d = qf_diagram(path(3), (1,), {0, 2})
    assert ("S", (("a", 0), ("x", 0))) in d.facts
    assert ("S", (("x", 0), ("a", 2))) in d.facts
    empty = qf_diagram(empty_structure(3), (0,), {1, 2})
    assert empty.facts == () and empty.equalities == ()
    both = qf_diagram(TWO_CLASSES, (0, 1), ())
    assert set(both.facts) == {
        ("E", (("x", i), ("x", j))) for i in range(2) for j in range(2)
    }


@given(structures(max_n=5), st.data())
def test_diagram_equality_matches_type_equal(m, data):
    if m.size < 2:
        return
    k = data.draw(st.integers(1, min(2, m.size)))
    c = tuple(data.draw(st.permutations(range(m.size)))[:k])
    d = tuple(data.draw(st.permutations(range(m.size)))[:k])
    A = data.draw(st.sets(st.integers(0, m.size - 1), max_size=3))
    expect = oracles.order_shadow_types_equal(m, c, d, A)
    assert type_equal(m, c, d, A) == expect
    assert (qf_diagram(m, c, A).facts == qf_diagram(m, d, A).facts
            and qf_diagram(m, c, A).equalities == qf_diagram(m, d, A).equalities) == expect


def test_indiscernibility_examples():
    classes = eqrel([2, 2, 2])
    seq = [(0, 1), (2, 3), (4, 5)]
    assert is_order_indiscernible(classes, seq, window=2)
    assert is_totally_indiscernible(classes, seq, window=3)
    assert is_order_indiscernible(classes, [(0, 1)])
    # an order on single points is order indiscernible but not totally
    lo = linear_order(4)
    assert is_order_indiscernible(lo, [(0,), (1,), (2,), (3,)])
    assert is_strictly_order_indiscernible(lo, [(0,), (1,), (2,), (3,)])
    # listed against the order, increasing subsequences disagree with the rest
    assert not is_order_indiscernible(lo, [(0,), (2,), (1,)], window=2)


def test_total_indiscernibility_fails_with_marked_point():
    sig = Signature([("P", 1), ("S", 2)])
    m = Structure(sig, 4, [("S", (0, 1)), ("S", (2, 3)), ("P", (0,))])
    assert not is_totally_indiscernible(m, [(0, 1), (2, 3)], window=2)


def test_indiscernibility_overlap_errors():
    with pytest.raises(StructureError):
        is_order_indiscernible(TWO_CLASSES, [(0, 1), (1, 2)])
    with pytest.raises(StructureError):
        is_order_indiscernible(TWO_CLASSES, [(0,), (1,)], A={0})
    with pytest.raises(StructureError):
        is_order_indiscernible(TWO_CLASSES, [(0,), (1,)], window=1)


def test_permissible_examples():
    assert permissible_permutations(TWO_CLASSES, [(0,)], 0).permutations == {(0,)}
    classes = eqrel([2, 2, 2])
    ps = permissible_permutations(classes, [(0, 1), (2, 3), (4, 5)], 0)
    assert ps.permutations == {(0, 1), (1, 0)}
    directed = disjoint_edges(2, symmetric=False)
    assert permissible_permutations(directed, [(0, 1), (2, 3)], 0).permutations == {(0, 1)}
    with pytest.raises(StructureError):
        permissible_permutations(classes, [(0, 1)], 3)


@given(structures(max_n=5), st.data())
def test_permissible_is_subgroup(m, data):
    k = min(3, m.size)
    if k == 0:
        return
    a = tuple(data.draw(st.permutations(range(m.size)))[:k])
    ps = permissible_permutations(m, [a], 0)
    assert is_subgroup(ps.permutations, k)
    for pi in ps.permutations:
        perm = list(range(m.size))
        for j, i in enumerate(pi):
            perm[a[i]] = a[j]
        assert oracles.apply(m, perm) == oracles.facts_of(m)


def test_apply_perm():
    assert apply_perm((2, 0, 1), ("a", "b", "c")) == ("c", "a", "b")


@given(structures(max_n=4))
def test_type_equal_is_equivalence(m):
    tuples = list(permutations(range(m.size), 1))
    for c in tuples:
        assert type_equal(m, c, c)
        for d in tuples:
            assert type_equal(m, c, d) == type_equal(m, d, c)
            for e in tuples:
                if type_equal(m, c, d) and type_equal(m, d, e):
                    assert type_equal(m, c, e)
