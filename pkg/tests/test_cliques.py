import random
from collections import Counter
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import structures
from sibtool.builders import (
    disjoint_edges,
    edges_and_clique,
    empty_structure,
    eqrel,
    random_relabel,
)
from sibtool.cliques import (
    KClique,
    average_type,
    clique_size_census,
    enumerate_maximal_kcliques,
    exchangeable,
    exchangeable_by_swap,
    exchangeable_by_type,
    extend_clique,
    is_kclique,
    make_clique,
    meld,
    sufficiently_large_threshold,
)
from sibtool.errors import CliqueError, StructureError
from sibtool.qftype import is_totally_indiscernible

TWO_CLASSES = eqrel([2, 2])


def test_exchangeable_examples():
    assert exchangeable(empty_structure(3), (0,), (1,))
    assert exchangeable(TWO_CLASSES, (0, 1), (2, 3))
    assert not exchangeable(TWO_CLASSES, (0,), (2,))


def test_exchangeable_input_errors():
    with pytest.raises(StructureError):
        exchangeable(TWO_CLASSES, (0,), (1, 2))
    with pytest.raises(StructureError):
        exchangeable(TWO_CLASSES, (0, 0), (1, 2))
    assert not exchangeable(TWO_CLASSES, (0, 1), (1, 2))


@given(structures(max_n=5), st.data())
def test_routes_agree_with_oracle(m, data):
    if m.size < 2:
        return
    k = data.draw(st.integers(1, m.size // 2))
    order = data.draw(st.permutations(range(m.size)))
    a, b = tuple(order[:k]), tuple(order[k:2 * k])
    want = oracles.exchangeable(m, a, b)
    assert exchangeable_by_swap(m, a, b) == want
    assert exchangeable_by_type(m, a, b) == want
    assert exchangeable(m, a, b) == want


def _members(cliques):
    return sorted(c.sorted_members() for c in cliques)


def test_enumeration_examples():
    cl = enumerate_maximal_kcliques(empty_structure(4), 1)
    assert _members(cl) == [[(0,), (1,), (2,), (3,)]]
    cl = enumerate_maximal_kcliques(eqrel([3, 3]), 1)
    assert _members(cl) == [[(0,), (1,), (2,)], [(3,), (4,), (5,)]]


def test_edges_and_clique_pairs():
    m = edges_and_clique(5, 6)
    cl = enumerate_maximal_kcliques(m, 2)
    assert _members(cl) == oracles.maximal_cliques(m, 2)
    census = Counter(c.size for c in cl)
    # frozen from the networkx oracle
    assert census == Counter({5: 32, 3: 120, 2: 380})
    edge_tuples = {(2 * i, 2 * i + 1) for i in range(5)} | {(2 * i + 1, 2 * i) for i in range(5)}
    inside = {t for t in combinations(range(10, 16), 2)} | {t[::-1] for t in combinations(range(10, 16), 2)}
    for c in cl:
        assert not (c.members & edge_tuples and c.members & inside)
    for c in cl:
        if c.size == 5:
            assert c.members <= edge_tuples


def test_edges_and_clique_singletons():
    # the two endpoints of a symmetric edge are exchangeable with each other
    census = clique_size_census(edges_and_clique(5, 6), 1)
    assert census == Counter({6: 1, 2: 5})


@given(structures(max_n=5), st.integers(1, 2))
def test_enumeration_matches_networkx(m, k):
    if k > m.size:
        return
    assert _members(enumerate_maximal_kcliques(m, k)) == oracles.maximal_cliques(m, k)


def test_enumeration_pool_and_errors():
    m = eqrel([3, 3])
    cl = enumerate_maximal_kcliques(m, 1, pool=[(0,), (1,), (3,)])
    assert _members(cl) == [[(0,), (1,)], [(3,)]]
    with pytest.raises(CliqueError):
        enumerate_maximal_kcliques(m, 0)
    with pytest.raises(CliqueError):
        enumerate_maximal_kcliques(m, 2, pool=[(0,)])
    with pytest.raises(CliqueError):
        enumerate_maximal_kcliques(empty_structure(30), 4, cap=1000)


def test_census_examples():
    assert clique_size_census(eqrel([3, 3]), 1) == Counter({3: 2})
    assert clique_size_census(empty_structure(4), 1) == Counter({4: 1})


@given(structures(max_n=5), st.randoms(use_true_random=False))
def test_census_isomorphism_invariant(m, rnd):
    other = random_relabel(m, rnd)
    for k in (1, 2):
        if k <= m.size:
            assert clique_size_census(m, k) == clique_size_census(other, k)


def test_ti_equiv_small():
    m = eqrel([2, 2, 2])
    fam = [(0, 1), (2, 3), (4, 5)]
    assert is_kclique(m, fam)
    assert is_totally_indiscernible(m, fam, window=3)


def test_subsets_of_cliques_are_cliques():
    for c in enumerate_maximal_kcliques(edges_and_clique(2, 4), 2):
        members = c.sorted_members()
        for r in range(1, len(members) + 1):
            for sub in combinations(members, r):
                assert is_kclique(c.host, sub)


def test_meld_examples():
    m = eqrel([4])
    a = make_clique(m, [(0,), (1,)])
    b = make_clique(m, [(1,), (2,), (3,)])
    assert sorted(meld(m, a, b).members) == [(0,), (1,), (2,), (3,)]
    assert meld(m, a, a).members == a.members
    c = make_clique(m, [(2,), (3,)])
    with pytest.raises(CliqueError):
        meld(m, a, c)


def test_make_clique_rejects():
    with pytest.raises(CliqueError):
        make_clique(TWO_CLASSES, [(0,), (2,)])
    with pytest.raises(CliqueError):
        make_clique(TWO_CLASSES, [])


def test_extend_examples():
    m = eqrel([3])
    big, c = extend_clique(m, make_clique(m, [(0,), (1,), (2,)]))
    assert big == eqrel([4])
    assert c.size == 4
    big2, c2 = extend_clique(big, c)
    assert c2.size == 5 and big2 == eqrel([5])


def test_extend_edges():
    m = disjoint_edges(5)
    a = make_clique(m, [(2 * i, 2 * i + 1) for i in range(5)])
    big, c = extend_clique(m, a)
    assert big == disjoint_edges(6)
    assert c.size == 6
    for old in enumerate_maximal_kcliques(m, 2):
        if old.size > sufficiently_large_threshold(2, 2):
            assert is_kclique(big, old.members)


def test_extend_random_cliques():
    rnd = random.Random(7)
    from sibtool.builders import random_structure
    from sibtool.structure import Signature

    sig = Signature([("E", 2)])
    done = 0
    while done < 20:
        m = random_structure(rnd, rnd.randint(3, 6), sig, 0.4, symmetric=True)
        cl = [c for c in enumerate_maximal_kcliques(m, 1) if c.size >= 2]
        if not cl:
            continue
        big, c = extend_clique(m, cl[0])
        assert is_kclique(big, c.members)
        assert big.size == m.size + 1
        done += 1


def test_average_type_examples():
    m = eqrel([3, 3])
    t = average_type(m, make_clique(m, [(0,), (1,), (2,)]), {3, 4, 5})
    assert t.diagram.facts == (("E", (("x", 0), ("x", 0))),)
    e = empty_structure(2)
    t = average_type(e, make_clique(e, [(0,), (1,)]), ())
    assert t.diagram.facts == ()
    m3 = eqrel([3, 3, 3])
    ta = average_type(m3, make_clique(m3, [(0,), (1,)]), {2})
    tb = average_type(m3, make_clique(m3, [(3,), (4,)]), {2})
    assert ta != tb
    with pytest.raises(CliqueError):
        average_type(m, make_clique(m, [(0,), (1,)]), {0})
    with pytest.raises(CliqueError):
        average_type(m, make_clique(m, [(0,)]), ())


def test_kclique_repr_and_carrier():
    c = KClique(TWO_CLASSES, 2, frozenset([(0, 1), (2, 3)]))
    assert c.carrier == {0, 1, 2, 3}
    assert len(c) == 2
