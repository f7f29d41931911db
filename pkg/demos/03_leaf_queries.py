# coding: utf-8

# # Topological queries, one leaf at a time
#
# Relations are never stored for the whole complex. Each leaf is expanded
# into a small local structure, queried, and dropped (or kept in an LRU
# cache when several passes need it).

from stellar import (ExpandedLeaf, LeafCache, extract_p_cells, gen_grid, general_coboundary,
                     restricted_vertex_coboundary, run_pipeline, vertex_coboundary_all_p,
                     visit_leaves)

tree = run_pipeline(gen_grid("tet3d", 6, 6, 6), kv=64)
leaf = tree.leaves()[0]
el = ExpandedLeaf(tree, leaf)
print(el.num_tops(), "top cells touch leaf 0")

# The edges and triangles with at least one vertex in the leaf, each
# listed once with its sorted vertex tuple.

edges = extract_p_cells(el, 1)
tris = extract_p_cells(el, 2)
print(len(edges.tuples), "edges,", len(tris.tuples), "triangles;", edges.tuples[:3])

# Tetrahedra around each vertex of the leaf, and all edges around each
# vertex.

r03 = restricted_vertex_coboundary(el, 3)
r01 = vertex_coboundary_all_p(el, 1)
v = leaf.v_start
print(v, len(r03[v]), "tets,", len(r01[v]), "edges")

# Triangles around each edge of the leaf.

r12 = general_coboundary(el, 1, 2)
e, around = next(iter(r12.items()))
print(edges.tuples[e], "->", [tris.tuples[t] for t in around])

# visit_leaves runs a kernel over every leaf. The cache avoids rebuilding
# expanded leaves in a second pass.

cache = LeafCache(8)
sizes = visit_leaves(tree, lambda el, cx: len(extract_p_cells(el, 1).tuples), cache)
print(tree.num_leaves, "leaves,", sum(sizes), "edge records (shared edges counted per leaf)")
print("cache misses", cache.misses)
