# coding: utf-8

# # Building mesh connectivity from the tree
#
# Three classic structures are generated leaf by leaf: the indexed
# adjacency structure (neighbors across each facet), its extension to
# non-manifold and mixed complexes, and half-edges for polygonal surfaces.

import math

import numpy as np

from stellar import (BOUNDARY, NONMANIFOLD, IndexedComplex, Simplex, gen_grid, gen_halfedge,
                     gen_ia, gen_iastar, run_pipeline)

tree = run_pipeline(gen_grid("tet3d", 8, 8, 8), kv=64)
ia = gen_ia(tree)
adj = ia.adjacency[Simplex(3)]
print(adj.shape, int((adj == BOUNDARY).sum()), "boundary facets")

# Three tetrahedra glued along one triangle. The shared triangle has three
# cofaces, so every slot facing it is marked and the triangle is listed
# with its cofaces.

coords = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [.2, .2, 1], [.2, .2, -1], [-1, -1, .3]])
fan = IndexedComplex(coords, {Simplex(3): np.array([[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]])})
res = gen_iastar(run_pipeline(fan, kv=2))
print(res.adjacency[Simplex(3)])
print(int((res.adjacency[Simplex(3)] == NONMANIFOLD).sum()), "marked slots;", res.nonmanifold[3])

# Two triangles meeting at a single vertex: that vertex keeps one
# representative per connected group of triangles around it.

pin = IndexedComplex(np.array([[0, 0], [1, 0], [1, 1], [-1, 0], [-1, -1]], float),
                     {Simplex(2): np.array([[0, 1, 2], [0, 3, 4]])})
tree = run_pipeline(pin, kv=math.inf, keep_permutations=True)
v = int(np.flatnonzero(tree.provenance["vertex"] == 0)[0])
print("clusters at the shared vertex:", len(gen_iastar(tree).partial_coboundary[2][v]))

# Half-edges on a closed torus: every half-edge is paired and V - E + F = 0.

cx = gen_grid("torus_quad", 8, 8)
he = gen_halfedge(run_pipeline(cx, kv=16))
print(len(he), "half-edges,", he.num_boundary(), "unpaired,",
      "V-E+F =", cx.num_vertices - he.num_edges() + cx.num_top_cells)

# Local mode streams one leaf at a time and keeps only that leaf's facet
# map, so the auxiliary memory follows the largest leaf, not the mesh.

tree = run_pipeline(gen_grid("tet3d", 32, 32, 4), kv=64)
run = gen_ia(tree, mode="local", callback=lambda res: None)
print("aux peak", run.aux_peak, "largest leaf", run.max_leaf_tops, "cells", tree.complex.num_top_cells)
