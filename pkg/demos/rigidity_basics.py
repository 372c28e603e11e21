"""Walkthrough: frameworks, the rigidity matrix, and the rank test.

A framework couples a graph with a planar configuration and a vertex
bipartition: A-vertices measure signed angles between incident edges,
D-vertices measure ratios of incident edge lengths.  The framework is
infinitesimally rigid when the measurement Jacobian has rank 2n - 4; the
4-dimensional deficit is spanned by translations, rotation, and scaling,
which preserve every measurement.
"""

import numpy as np

from sarod import (
    Bipartition,
    Framework,
    Graph,
    duality_check,
    infinitesimal_rigidity_test,
    numerical_rank,
)
from sarod.rigidity import assemble_rigidity_matrix, trivial_motions

rng = np.random.default_rng(0)

# A triangle is rigid under any nontrivial bipartition.
triangle = Graph(3, ((1, 2), (1, 3), (2, 3)))
points = rng.uniform(0, 1, (3, 2))
for a_set in ([1], [2, 3]):
    fw = Framework(triangle, Bipartition.from_a_set(3, a_set), points)
    report = infinitesimal_rigidity_test(fw)
    print(f"triangle, A={a_set}: rank {report.rank}/{report.required} -> {report.verdict}")

# The rigidity matrix of a larger random framework: one row per measurement
# triple (angles first), columns are vertex velocities.
g = Graph.from_edges(6, [(1, 2), (1, 4), (2, 3), (2, 5), (2, 6), (3, 4), (4, 5), (5, 6)])
fw = Framework(g, Bipartition.from_a_set(6, [2]), rng.uniform(0, 1, (6, 2)))
rm = assemble_rigidity_matrix(fw)
print(f"\n6-vertex framework: {len(rm.sa_triples)} angle rows + {len(rm.rod_triples)} ratio rows, shape {rm.matrix.shape}")

rank, sigma = numerical_rank(rm.matrix)
print(f"rank {rank} (needs {2 * fw.n - 4}); smallest retained singular value {sigma[rank - 1]:.3e}")

# The four shape-preserving motions are exactly annihilated.
T = trivial_motions(fw.points)
print("max |R v| over trivial motions:", np.max(np.abs(rm.matrix @ T)))

# Swapping the sensing roles of the two vertex classes never changes the rank.
dual = duality_check(fw)
print(f"duality: rank {dual.rank} vs swapped {dual.rank_swapped} -> equal = {dual.equal}")

# The row budget bounds the rank: rank <= 2m - n, so rigidity needs
# m >= (3n - 4) / 2 edges.
print(f"rank bound: {rank} <= 2m - n = {2 * fw.m - fw.n}")
