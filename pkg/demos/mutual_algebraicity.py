"""
Bounded relations, components and disjoint realizations
=======================================================

A relation is mutually algebraic at the atomic level when every element
lies in boundedly many of its facts.  The facts then form a hypergraph whose
connected components are the building blocks of the structure.
"""

from sibtool.builders import disjoint_edges, eqrel, path
from sibtool.mutalg import (
    component_census,
    connected_chain,
    ma_components,
    ma_report,
    max_disjoint_realizations,
)
from sibtool.structure import disjoint_union, serialize_structure

m = disjoint_union(path(4), path(4), path(2))
print(ma_report(m).verdicts())

# Components are listed by least element.
print(ma_components(m))

# Isomorphic components are grouped; the representative is in canonical form.
for cls in component_census(m):
    print(cls.multiplicity, "x", serialize_structure(cls.representative).replace("\n", " | "))

# Every component is the top of an increasing chain of connected parts.
print([sorted(part) for part in connected_chain(m, ma_components(m)[0])])

# How many pairwise disjoint realizations does a formula have?  Each
# realization uses its own elements.
print("disjoint S-edges in a path of 5:", max_disjoint_realizations(path(5), "S(x1,x2)"))
print("disjoint E-pairs in classes 4,4:", max_disjoint_realizations(eqrel([4, 4]), "E(x1,x2) & x1!=x2"))
print("disjoint edges among 3 edges:", max_disjoint_realizations(disjoint_edges(3), "E(x1,x2)"))
