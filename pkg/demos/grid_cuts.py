"""
Cutting the cliques of a grid
=============================

A grid presentation has one infinite k-clique per label.  Cutting the
clique of each label to a chosen finite size gives a structure whose
maximal clique sizes are exactly the cut sizes, so different sets of sizes
give structures that do not embed into each other both ways.
"""

from collections import Counter

from sibtool.cliques import enumerate_maximal_kcliques
from sibtool.embed import census
from sibtool.presentations import builtin_grid, generate_Nf

g = builtin_grid(rank=1, k=1, labels=("a", "b", "c"))
print("valid:", g.validate().valid, " threshold:", g.threshold)

t = 13
cuts = [{"a": 5, "b": 7, "c": 9}, {"a": 9, "b": 7, "c": 5}, {"a": 5, "b": 8, "c": 9}, {"a": 6}]
built = []
for f in cuts:
    n = generate_Nf(g, f, t)
    inst = g.instantiate(t, f)
    pool = [a for lab in g.labels for a in inst.members[lab]]
    sizes = Counter(c.size for c in enumerate_maximal_kcliques(n, g.k, pool=pool))
    print(f, "->", n.size, "elements, clique sizes", dict(sizes))
    built.append(n)

# The first two cuts use the same set of sizes on different labels.
for block in census(built).blocks:
    print("block", block.members)
