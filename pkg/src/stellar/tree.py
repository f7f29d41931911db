"""Nested spatial decomposition (bucket PR quadtree / kD-tree) over a CP complex.

Blocks are half-open: a block covers ``[lower, upper)`` on every axis, so a
point on a split plane belongs to the block above the plane.  The root
is treated as closed so vertices on its upper faces are still covered.
Block domains are never stored; they are rebuilt from the split planes
on the way down from the root.
"""
from __future__ import annotations

import math
from typing import Iterator, Optional

import numpy as np

from .complex import INDEX_DTYPE, IndexedComplex
from .errors import EmptyComplexError, OutOfDomainError, ParameterError
from .sre import SreList

__all__ = [
    "Block",
    "StellarTree",
    "build_hierarchy",
    "locate_leaf",
    "insert_top_cells",
    "resolve_split_mode",
]

ENCODINGS = ("explicit", "vertex_compressed", "compressed")
SPLIT_MODES = ("quad", "kd")
KD_THRESHOLD_DIM = 6


class Block:
    """A node of the containment hierarchy.

    Internal blocks point at their brood (``children``, one slot per
    sub-block, ``None`` for empty sub-blocks that are not materialized).
    Leaves carry the vertex map, either as the range ``[v_start, v_end)``
    once vertices are reindexed or as an explicit ``vertices`` array, and
    one :class:`SreList` of top-cell indices per cell kind.
    """

    __slots__ = ("parent", "children", "position", "depth",
                 "v_start", "v_end", "vertices", "tops", "leaf_id")

    def __init__(self, parent=None, position=0, depth=0):
        self.parent = parent
        self.children = None
        self.position = position
        self.depth = depth
        self.v_start = None
        self.v_end = None
        self.vertices = None
        self.tops = {}
        self.leaf_id = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def num_vertices(self) -> int:
        if self.vertices is not None:
            return len(self.vertices)
        return self.v_end - self.v_start

    def vertex_ids(self) -> np.ndarray:
        if self.vertices is not None:
            return np.asarray(self.vertices)
        return np.arange(self.v_start, self.v_end, dtype=np.int64)

    def __repr__(self):
        kind = "leaf" if self.is_leaf else "internal"
        return f"<Block {kind} depth={self.depth} id={self.leaf_id} v=[{self.v_start},{self.v_end})>"


def resolve_split_mode(split_mode: str, ambient_dim: int) -> str:
    if split_mode == "auto":
        return "quad" if ambient_dim <= KD_THRESHOLD_DIM else "kd"
    if split_mode not in SPLIT_MODES:
        raise ParameterError(f"split mode must be auto, quad or kd; got {split_mode!r}")
    return split_mode


def _midpoint(lo, hi):
    return (lo + hi) * 0.5


class StellarTree:
    """Stellar tree: complex + block hierarchy + per-leaf vertex and top-cell maps."""

    def __init__(self, complex: IndexedComplex, kv, split_mode: str, lower, upper,
                 max_depth: int = 64):
        self.complex = complex
        self.kv = kv
        self.split_mode = split_mode
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        self.max_depth = max_depth
        self.root = Block()
        self.encoding = "explicit"
        self.vertices_reindexed = False
        self.cells_inserted = False
        self.cells_reindexed = False
        # new -> original ids, kept only when requested by the pipeline
        self.provenance: Optional[dict] = None
        self.timings: dict = {}
        self._leaves = None

    # ---- structure -------------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        return self.lower.shape[0]

    @property
    def brood_size(self) -> int:
        return 2 ** self.ambient_dim if self.split_mode == "quad" else 2

    def split_axes(self, depth: int) -> tuple:
        if self.split_mode == "quad":
            return tuple(range(self.ambient_dim))
        return (depth % self.ambient_dim,)

    def depth_cap(self) -> int:
        return self.max_depth if self.split_mode == "quad" else self.max_depth * self.ambient_dim

    def blocks(self) -> Iterator[Block]:
        """Pre-order (depth-first) traversal of materialized blocks."""
        stack = [self.root]
        while stack:
            b = stack.pop()
            yield b
            if b.children is not None:
                stack.extend(c for c in reversed(b.children) if c is not None)

    def leaves(self) -> list:
        if self._leaves is None:
            self._leaves = [b for b in self.blocks() if b.is_leaf]
            for i, leaf in enumerate(self._leaves):
                leaf.leaf_id = i
        return self._leaves

    @property
    def num_blocks(self) -> int:
        return sum(1 for _ in self.blocks())

    @property
    def num_leaves(self) -> int:
        return len(self.leaves())

    def block_domain(self, block: Block):
        """``(lower, upper)`` of a block, rebuilt from the split planes."""
        path = []
        b = block
        while b.parent is not None:
            path.append(b)
            b = b.parent
        lo, hi = self.lower.copy(), self.upper.copy()
        for b in reversed(path):
            axes = self.split_axes(b.parent.depth)
            for j, ax in enumerate(axes):
                mid = _midpoint(lo[ax], hi[ax])
                if (b.position >> j) & 1:
                    lo[ax] = mid
                else:
                    hi[ax] = mid
        return lo, hi

    def leaf_starts(self) -> np.ndarray:
        return np.array([leaf.v_start for leaf in self.leaves()], dtype=np.int64)

    def vertex_leaf(self, vertex_ids) -> np.ndarray:
        """Leaf id of each vertex.  Range search once vertices are reindexed."""
        v = np.asarray(vertex_ids)
        if self.vertices_reindexed:
            return (np.searchsorted(self.leaf_starts(), v, side="right") - 1).astype(INDEX_DTYPE)
        owner = np.full(self.complex.num_vertices, -1, dtype=INDEX_DTYPE)
        for leaf in self.leaves():
            owner[leaf.vertices] = leaf.leaf_id
        return owner[v]

    def leaf_contains(self, leaf: Block, v: int) -> bool:
        if self.vertices_reindexed:
            return leaf.v_start <= v < leaf.v_end
        return bool(np.any(leaf.vertices == v))

    def __repr__(self):
        return (f"<StellarTree kv={self.kv} split={self.split_mode} encoding={self.encoding} "
                f"blocks={self.num_blocks} leaves={self.num_leaves}>")


def build_hierarchy(cx: IndexedComplex, kv=100, split_mode: str = "auto",
                    max_depth: int = 64) -> StellarTree:
    """Insert every vertex into a bucket PR tree with bucketing threshold ``kv``.

    ``kv`` may be ``math.inf``, which yields a single root leaf indexing the
    whole complex.  The tree is built top-down; with midpoint splits this
    gives the same blocks as inserting vertices one at a time, in any order.
    """
    if not (kv == math.inf or (isinstance(kv, (int, np.integer)) and kv >= 1)):
        raise ParameterError(f"bucketing threshold must be an integer >= 1 or inf, got {kv!r}")
    if cx.num_vertices == 0:
        raise EmptyComplexError("cannot build a hierarchy over a complex without vertices")
    coords = cx.coords
    mode = resolve_split_mode(split_mode, cx.ambient_dim)
    tree = StellarTree(cx, kv, mode, coords.min(axis=0), coords.max(axis=0), max_depth)
    cap = tree.depth_cap()

    stack = [(tree.root, tree.lower.copy(), tree.upper.copy(), np.arange(cx.num_vertices))]
    while stack:
        blk, lo, hi, idx = stack.pop()
        if idx.size <= kv or blk.depth >= cap or _coincident(coords, idx):
            blk.vertices = idx
            continue
        axes = tree.split_axes(blk.depth)
        code = np.zeros(idx.size, dtype=np.int64)
        mids = []
        for j, ax in enumerate(axes):
            mid = _midpoint(lo[ax], hi[ax])
            mids.append(mid)
            code |= (coords[idx, ax] >= mid).astype(np.int64) << j
        nchild = 2 ** len(axes)
        order = np.argsort(code, kind="stable")
        counts = np.bincount(code, minlength=nchild)
        bounds = np.concatenate(([0], np.cumsum(counts)))
        blk.children = [None] * nchild
        for c in range(nchild):
            if counts[c] == 0:
                continue
            child = Block(blk, c, blk.depth + 1)
            blk.children[c] = child
            clo, chi = lo.copy(), hi.copy()
            for j, ax in enumerate(axes):
                if (c >> j) & 1:
                    clo[ax] = mids[j]
                else:
                    chi[ax] = mids[j]
            stack.append((child, clo, chi, idx[order[bounds[c]:bounds[c + 1]]]))
    tree.leaves()
    return tree


def _coincident(coords, idx) -> bool:
    pts = coords[idx]
    return bool(np.all(pts == pts[0]))


def locate_leaf(tree: StellarTree, point) -> Optional[Block]:
    """Leaf whose half-open domain contains ``point``.

    Returns ``None`` when the point falls in an empty (unmaterialized) block.
    """
    p = np.asarray(point, dtype=np.float64)
    if p.shape != tree.lower.shape or np.any(p < tree.lower) or np.any(p > tree.upper):
        raise OutOfDomainError(f"point {p.tolist()} lies outside the root block")
    lo, hi = tree.lower.copy(), tree.upper.copy()
    blk = tree.root
    while not blk.is_leaf:
        axes = tree.split_axes(blk.depth)
        c = 0
        for j, ax in enumerate(axes):
            mid = _midpoint(lo[ax], hi[ax])
            if p[ax] >= mid:
                c |= 1 << j
                lo[ax] = mid
            else:
                hi[ax] = mid
        blk = blk.children[c]
        if blk is None:
            return None
    return blk


def insert_top_cells(tree: StellarTree) -> StellarTree:
    """Populate every leaf's top-cell lists.

    A top cell is listed in leaf ``B`` iff at least one of its vertices is
    mapped to ``B``; lists are in ascending cell order, one entry per cell.
    """
    leaves = tree.leaves()
    nleaves = len(leaves)
    for leaf in leaves:
        leaf.tops = {}
    for kind, cells in tree.complex.cells.items():
        leaf_of = np.sort(tree.vertex_leaf(cells), axis=1)
        keep = np.ones(leaf_of.shape, dtype=bool)
        keep[:, 1:] = leaf_of[:, 1:] != leaf_of[:, :-1]
        rows = np.nonzero(keep)[0].astype(INDEX_DTYPE)
        pair_leaf = leaf_of[keep]
        del leaf_of, keep
        order = np.argsort(pair_leaf, kind="stable")
        counts = np.bincount(pair_leaf, minlength=nleaves)
        rows = rows[order]
        del order, pair_leaf
        bounds = np.concatenate(([0], np.cumsum(counts)))
        for leaf in leaves:
            lo, hi = bounds[leaf.leaf_id], bounds[leaf.leaf_id + 1]
            if hi > lo:
                leaf.tops[kind] = SreList.literal(rows[lo:hi])
    tree.cells_inserted = True
    return tree
