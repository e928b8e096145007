"""
Counting siblings of cellular and chain presentations
=====================================================

A sibling is a structure that embeds into a given one and vice versa.  For
the presentations shipped in ``fixtures/`` the classifier reports whether
there is one sibling up to isomorphism, countably many, or continuum many,
and the generators build finite pieces of the witnessing families.
"""

from pathlib import Path

from sibtool.embed import census
from sibtool.presentations import classify, generate_Mstar_ell, generate_NS, load_presentation, separate

FIX = Path(__file__).resolve().parent.parent / "fixtures"

for name in ["unary_predicates.pres.json", "edges_clique.pres.json",
             "edges_independent.pres.json", "grid_rank1_k1.pres.json", "path_chain.chain.json"]:
    v = classify(load_presentation(FIX / name))
    print(f"{name:32} {v.verdict.name:10} {v.justification}")

# Stranding the first entries of l+1 edges leaves a 1-clique whose size grows
# with l, so the finite pieces are pairwise non-isomorphic.
p = separate(load_presentation(FIX / "edges_independent.pres.json"), 8)
runs = [generate_Mstar_ell(p, "edges", ell, 8) for ell in range(1, 5)]
for ell, r in enumerate(runs, start=1):
    print("l =", ell, "stranded clique size", r.clique_size, "removed", r.removed_families)
print("blocks:", len(census([r.structure for r in runs]).blocks))

# A chain of paths where no link embeds into an earlier one: each set S of
# links gives its own structure.
c = load_presentation(FIX / "path_chain.chain.json")
pieces = [generate_NS(c, S, 4) for S in [(0,), (1,), (0, 2), (1, 3, 4)]]
print("chain pieces:", [s.size for s in pieces], "blocks:", len(census(pieces).blocks))
