"""Stellar trees: compact spatial indexing of Canonical Polytope complexes.

Typical use::

    from stellar import gen_grid, run_pipeline, tree_stats, gen_iastar
    cx = gen_grid("tri2d", 64, 64)
    tree = run_pipeline(cx, kv=100)          # relabels cx in place
    print(tree_stats(tree).chi, tree_stats(tree).mu)
    ia = gen_iastar(tree)
"""
from .complex import (INDEX_DTYPE, CellKind, Cube, IndexedComplex, Simplex, boundary_faces,
                      build_indexed_complex, canonical_tuple, complex_from_soup, face_count,
                      face_positions, indexed_storage_cost)
from .errors import *  # noqa: F401,F403
from .generators import (BOUNDARY, NONMANIFOLD, UNKNOWN, HalfEdgeStructure, IAStarStructure,
                         LocalAdjacency, LocalHalfEdges, LocalRun, gen_halfedge, gen_ia, gen_iastar)
from .io import parse_mesh, read_stellar, write_indexed, write_off, write_stellar
from .queries import (ExpandedLeaf, LeafCache, PCells, extract_p_cells, general_coboundary,
                      restricted_vertex_coboundary, vertex_coboundary_all_p,
                      vertex_coboundary_by_tops, visit_leaves)
from .reindex import (compress_and_reindex_cells, compress_and_reindex_vertices, permute_array,
                      run_pipeline)
from .sre import SreList, sre_append, sre_compress, sre_decode, sre_expand_in_place, sre_iterate, sre_size
from .stats import (TreeStats, cost_bytes, reference_number, spanning_numbers, tree_stats,
                    tree_storage_cost)
from .synth import gen_grid, gen_sierpinski, gen_vrips
from .tree import StellarTree, build_hierarchy, insert_top_cells, locate_leaf

__version__ = "0.1.0"
