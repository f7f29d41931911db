"""Four-phase Stellar tree generation.

1. insert the vertices into the bucket PR tree;
2. reindex the vertices in depth-first leaf order so every leaf holds one
   contiguous range ``[v_start, v_end)``;
3. insert the top cells into every leaf indexing one of their vertices;
4. reindex the top cells so that cells indexed by the same tuple of leaves
   are contiguous, then SRE-compress the leaf lists.

All indices are 0-based.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .complex import INDEX_DTYPE, IndexedComplex
from .errors import CorruptionError, ParameterError
from .sre import sre_compress
from .tree import ENCODINGS, StellarTree, build_hierarchy, insert_top_cells

__all__ = [
    "LeafTupleIndex",
    "compress_and_reindex_vertices",
    "extract_leaf_tuples",
    "extract_cell_indices",
    "compress_tree_cells",
    "compress_and_reindex_cells",
    "permute_array",
    "run_pipeline",
    "PHASES",
]

PHASES = ("insert_verts", "reindex_verts", "insert_cells", "reindex_cells")


def permute_array(array: np.ndarray, permutation: np.ndarray) -> np.ndarray:
    """Move ``array[i]`` to ``array[permutation[i]]`` in place by following cycles.

    ``permutation`` is consumed: every entry is overwritten with ``-1`` as
    its element reaches its final slot.  Needs no buffer besides one row.
    """
    perm = permutation
    n = len(perm)
    if len(array) != n:
        raise ParameterError(f"array has {len(array)} rows but permutation has {n} entries")
    two_d = array.ndim > 1
    for i in range(n):
        t = int(perm[i])
        if t < 0:
            continue
        while t != i:
            if t >= n or t < 0 or perm[t] < 0:
                raise CorruptionError(f"permutation is not a bijection (entry {i} -> {t})")
            if two_d:
                tmp = array[i].copy()
                array[i] = array[t]
                array[t] = tmp
            else:
                array[i], array[t] = array[t], array[i]
            # the element now at i came from t; follow it to its own target
            perm[i] = perm[t]
            perm[t] = -1
            t = int(perm[i])
        perm[i] = -1
    return array


def _inverse(perm: np.ndarray) -> np.ndarray:
    inv = np.empty(len(perm), dtype=np.int64)
    inv[perm] = np.arange(len(perm))
    return inv


def compress_and_reindex_vertices(tree: StellarTree, keep_permutation: bool = False) -> StellarTree:
    """Give every leaf a contiguous vertex range and relabel the complex to match."""
    if tree.cells_inserted:
        raise ParameterError("vertices must be reindexed before top cells are inserted")
    cx = tree.complex
    v_perm = np.empty(cx.num_vertices, dtype=INDEX_DTYPE)
    current = 0
    for leaf in tree.leaves():
        n = len(leaf.vertices)
        v_perm[leaf.vertices] = np.arange(current, current + n, dtype=INDEX_DTYPE)
        leaf.v_start = current
        current += n
        leaf.v_end = current
        leaf.vertices = None
    for blk in reversed(list(tree.blocks())):
        if not blk.is_leaf:
            kids = [c for c in blk.children if c is not None]
            blk.v_start = kids[0].v_start
            blk.v_end = kids[-1].v_end

    for kind, cells in cx.cells.items():
        cells[...] = v_perm[cells]
    if keep_permutation:
        tree.provenance = tree.provenance or {}
        prev = tree.provenance.get("vertex", np.arange(cx.num_vertices))
        tree.provenance["vertex"] = prev[_inverse(v_perm)]
    permute_array(cx.coords, v_perm)
    tree.vertices_reindexed = True
    return tree


@dataclass
class LeafTupleIndex:
    """Unique leaf tuples (keyed by the leaves' ``v_start``) and their cell counts."""

    tuple_to_key: dict = field(default_factory=dict)
    group_counter: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def num_groups(self) -> int:
        return len(self.tuple_to_key)


def extract_leaf_tuples(tree: StellarTree) -> dict:
    """Group top cells by the tuple of leaves indexing them.

    Each cell is visited once, by the leaf holding its minimum vertex index.
    Keys are dense and assigned in first-encounter order of the depth-first
    leaf scan.  Returns ``{kind: (LeafTupleIndex, t_position)}`` where
    ``t_position[cell]`` is the cell's tuple key.
    """
    if not tree.vertices_reindexed:
        raise ParameterError("leaf tuples need reindexed vertices")
    starts = tree.leaf_starts()
    pad = len(starts)
    out = {}
    for kind, cells in tree.complex.cells.items():
        m = cells.shape[0]
        rows = np.sort(tree.vertex_leaf(cells), axis=1)
        if rows.shape[1] > 1:
            dup = np.zeros(rows.shape, dtype=bool)
            dup[:, 1:] = rows[:, 1:] == rows[:, :-1]
            rows[dup] = pad
            del dup
            rows.sort(axis=1)
        owner = rows[:, 0]
        uniq, inv = np.unique(rows, axis=0, return_inverse=True)
        inv = inv.ravel()
        del rows
        scan = np.argsort(owner, kind="stable")
        _, first = np.unique(inv[scan], return_index=True)
        del scan
        remap = np.empty(len(uniq), dtype=np.int64)
        remap[np.argsort(first, kind="stable")] = np.arange(len(uniq))
        t_position = remap[inv].astype(np.int64)
        del inv
        counter = np.bincount(t_position, minlength=len(uniq)).astype(np.int64)
        mapping = {}
        for j, row in enumerate(uniq.tolist()):
            mapping[tuple(int(starts[x]) for x in row if x != pad)] = int(remap[j])
        out[kind] = (LeafTupleIndex(mapping, counter), t_position)
        assert int(counter.sum()) == m
    return out


def extract_cell_indices(index: LeafTupleIndex, t_position: np.ndarray) -> np.ndarray:
    """Turn tuple keys into final cell positions, in place.

    The prefix sum of the group counts gives each group's first index;
    cells of a group then take consecutive indices in their original order.
    """
    counter = np.asarray(index.group_counter, dtype=np.int64)
    if int(counter.sum()) != len(t_position):
        raise CorruptionError("group counts do not add up to the number of cells")
    # a stable sort on the key lays groups out at their prefix-sum offsets,
    # each group keeping its cells in original index order
    order = np.argsort(t_position, kind="stable")
    t_position[order] = np.arange(len(order))
    return t_position


def compress_tree_cells(tree: StellarTree, t_positions: dict) -> StellarTree:
    """Rewrite every leaf list through the new cell order and SRE-compact it."""
    for leaf in tree.leaves():
        for kind, lst in list(leaf.tops.items()):
            new = np.sort(t_positions[kind][lst.decode()])
            leaf.tops[kind] = sre_compress(new)
    return tree


def compress_and_reindex_cells(tree: StellarTree, keep_permutation: bool = False) -> StellarTree:
    groups = extract_leaf_tuples(tree)
    t_positions = {}
    for kind, (index, t_position) in groups.items():
        t_positions[kind] = extract_cell_indices(index, t_position)
    compress_tree_cells(tree, t_positions)
    for kind, t_position in t_positions.items():
        if keep_permutation:
            tree.provenance = tree.provenance or {}
            prev = tree.provenance.get(kind, np.arange(len(t_position)))
            tree.provenance[kind] = prev[_inverse(t_position)]
        permute_array(tree.complex.cells[kind], t_position)
    tree.cells_reindexed = True
    return tree


def run_pipeline(cx: IndexedComplex, kv=100, encoding: str = "compressed",
                 split_mode: str = "auto", max_depth: int = 64,
                 keep_permutations: bool = False) -> StellarTree:
    """Build a Stellar tree over ``cx`` (which is relabelled in place).

    ``encoding`` selects the phases: ``explicit`` runs insertion only,
    ``vertex_compressed`` adds vertex reindexing, ``compressed`` runs all
    four phases.  Wall times per phase land in ``tree.timings``.  With
    ``keep_permutations`` the tree records, in ``tree.provenance``, the
    original index of every vertex and top cell.
    """
    if encoding not in ENCODINGS:
        raise ParameterError(f"encoding must be one of {ENCODINGS}, got {encoding!r}")
    timings = dict.fromkeys(PHASES, 0.0)

    t0 = time.perf_counter()
    tree = build_hierarchy(cx, kv, split_mode, max_depth)
    timings["insert_verts"] = time.perf_counter() - t0
    if keep_permutations:
        tree.provenance = {"vertex": np.arange(cx.num_vertices)}
        tree.provenance.update({k: np.arange(a.shape[0]) for k, a in cx.cells.items()})

    if encoding in ("vertex_compressed", "compressed"):
        t0 = time.perf_counter()
        compress_and_reindex_vertices(tree, keep_permutations)
        timings["reindex_verts"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    insert_top_cells(tree)
    timings["insert_cells"] = time.perf_counter() - t0

    if encoding == "compressed":
        t0 = time.perf_counter()
        compress_and_reindex_cells(tree, keep_permutations)
        timings["reindex_cells"] = time.perf_counter() - t0

    timings["total"] = sum(timings[p] for p in PHASES)
    tree.encoding = encoding
    tree.timings = timings
    return tree
