"""
Exchangeable tuples and k-cliques
=================================

Two disjoint tuples are exchangeable when swapping them pointwise is an
automorphism.  A k-clique is a set of pairwise disjoint, pairwise
exchangeable k-tuples.  This walk-through builds a few small structures and
looks at their maximal cliques.
"""

from sibtool.builders import edges_and_clique, eqrel
from sibtool.cliques import (
    clique_size_census,
    enumerate_maximal_kcliques,
    exchangeable,
    extend_clique,
    make_clique,
    meld,
)

# An equivalence relation with classes of sizes 3, 3 and 2.  Elements in the
# same class are exchangeable, and so are whole classes of equal size.
m = eqrel([3, 3, 2])
print(m)
print("0 ~ 1:", exchangeable(m, (0,), (1,)))
print("0 ~ 6:", exchangeable(m, (0,), (6,)))

# Singletons: one maximal 1-clique per class.
for c in enumerate_maximal_kcliques(m, 1):
    print("1-clique", c.sorted_members())

# Five disjoint edges next to a 6-clique.  For k = 2 the census counts the
# maximal 2-cliques by size; large ones come from the edges, and no maximal
# clique mixes edge tuples with pairs from the 6-clique.
g = edges_and_clique(5, 6)
print("2-clique census:", dict(clique_size_census(g, 2)))

# Two cliques that share a member and differ on disjoint carriers meld into
# one clique.
a = make_clique(m, [(0,), (1,)])
b = make_clique(m, [(1,), (2,)])
print("meld:", meld(m, a, b).sorted_members())

# Adjoining a fresh member to a clique gives a larger structure in which the
# old cliques are still cliques.
big, grown = extend_clique(m, make_clique(m, [(0,), (1,), (2,)]))
print("after extension:", big.size, "elements, clique", grown.sorted_members())
