"""
Embeddings, isomorphism and ages
================================

For finite structures, embedding both ways forces isomorphism.  Structures
that are far from isomorphic can still agree on all their small
substructures, which is what the age comparison measures.
"""

import random

from sibtool.builders import disjoint_edges, path, random_relabel, random_structure
from sibtool.embed import canonical_form, find_embedding, is_isomorphic, same_age_up_to
from sibtool.structure import Signature, serialize_structure

w = find_embedding(path(3), path(5))
print("path_3 into path_5:", w.mapping, "valid:", w.validate())
print("path_5 into path_3:", find_embedding(path(5), path(3)))

rng = random.Random(5)
s = random_structure(rng, 6, Signature([("E", 2)]), density=0.3)
r = random_relabel(s, rng)
print("relabelled copy isomorphic:", is_isomorphic(s, r) is not None)
print("same canonical form:", serialize_structure(canonical_form(s)) == serialize_structure(canonical_form(r)))

# Three and five disjoint edges look alike up to three points, but four
# independent points only fit into the larger one.
e3, e5 = disjoint_edges(3), disjoint_edges(5)
for size in (2, 3, 4):
    print("same age up to", size, ":", same_age_up_to(e3, e5, size))
