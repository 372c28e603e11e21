"""Walkthrough: growing rigid frameworks and merging them.

Each recipe grows a framework by typed vertex additions whose attribute
patterns preserve global rigidity.  The recipes differ in which measurement
index graph stays connected, which is exactly what the localization
solvers key on.  Merging two rigid frameworks needs only two well-chosen
cross edges (three A-endpoints among the four attachment vertices).
"""

import numpy as np

from sarod import (
    Framework,
    Graph,
    enumerate_triples,
    generate,
    infinitesimal_rigidity_test,
    merge_add_edges,
    triple_index_components,
)

print("recipe            n   m   rank/needed  SA-comps  RoD-comps")
for recipe, n in (("quad2v", 16), ("bilat-D1A1", 15), ("mix-D2A1", 16), ("type2D1", 16), ("minimal", 15)):
    con = generate(recipe, n, seed=4)
    fw = con.framework
    rep = infinitesimal_rigidity_test(fw)
    sa, rod = enumerate_triples(fw.graph, fw.bipartition, "full")
    _, c_a = triple_index_components(sa, fw.graph)
    _, c_d = triple_index_components(rod, fw.graph)
    print(f"{recipe:14s} {fw.n:4d} {fw.m:4d}   {rep.rank}/{rep.required} {rep.verdict:8s} {c_a:5d} {c_d:10d}")

# Minimality: the minimal recipe hits m = ceil((3n-4)/2) and deleting any
# single edge destroys rigidity.
fw = generate("minimal", 8, seed=0).framework
print(f"\nminimal n=8: m={fw.m} (bound {(3 * 8 - 4) // 2})")
broken = 0
for e in range(fw.m):
    edges = tuple(ed for k, ed in enumerate(fw.graph.edges) if k != e)
    if not infinitesimal_rigidity_test(Framework(Graph(fw.n, edges), fw.bipartition, fw.points)).rigid:
        broken += 1
print(f"deleting any of the {fw.m} edges breaks rigidity: {broken}/{fw.m}")

# Merging: pick two attachment vertices per framework with exactly three
# A-vertices among them, add two edges, and the union is rigid again.
import itertools

fw1 = generate("bilat-D1A1", 6, seed=2).framework
fw2 = generate("quad2v", 4, seed=3).framework
fw2 = Framework(fw2.graph, fw2.bipartition, fw2.points + np.array([3.0, 0.0]))
for i, m in itertools.permutations(range(1, 7), 2):
    pair = next(
        (
            (j, k)
            for j, k in itertools.permutations(range(1, 5), 2)
            if sum(a == "A" for a in (fw1.bipartition.attr(i), fw1.bipartition.attr(m), fw2.bipartition.attr(j), fw2.bipartition.attr(k))) == 3
        ),
        None,
    )
    if pair:
        merged = merge_add_edges(fw1, fw2, (i, m), pair)
        rep = infinitesimal_rigidity_test(merged)
        print(f"\nmerged {fw1.n}+{fw2.n} vertices with 2 extra edges: rank {rep.rank}/{rep.required} -> {rep.verdict}")
        break
