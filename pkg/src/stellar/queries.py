"""Batched topological queries over the leaves of a Stellar tree.

Every query works on an :class:`ExpandedLeaf`, a transient per-leaf view
that decodes the leaf's top-cell lists once and memoizes the relations
built on top of them.  :func:`visit_leaves` streams a kernel over the
leaves in depth-first order, recycling expanded leaves through an LRU
cache.

Top cells are addressed by their *k-index* (see
:meth:`IndexedComplex.kind_offsets`).  Non-top p-cells get leaf-local ids,
dense and in first-encounter order; callers that need global identity
should key by the canonical vertex tuple.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .complex import CellKind, Cube, Simplex, face_count, face_positions
from .errors import CapacityError, DimensionError, LeafKernelError, ParameterError

__all__ = [
    "ExpandedLeaf",
    "PCells",
    "LeafCache",
    "visit_leaves",
    "extract_p_cells",
    "restricted_vertex_coboundary",
    "vertex_coboundary_all_p",
    "vertex_coboundary_by_tops",
    "general_coboundary",
    "DEFAULT_FACE_BUDGET",
]

DEFAULT_FACE_BUDGET = 10 ** 8


def _face_kind(kind: CellKind, p: int) -> CellKind:
    if p == kind.dim:
        return kind
    if p <= 1 or kind.is_simplex:
        return Simplex(p)
    return Cube(p)


@dataclass
class PCells:
    """The p-cells of one leaf (``m_p`` plus an explicit R(p,0)).

    Attributes
    ----------
    index : dict
        canonical vertex tuple -> local id (the ``m_p`` map).
    tuples : list
        canonical tuple of each local id.
    kinds, verts : list
        kind and ordered vertices of the first occurrence of each p-cell.
    boundary : dict or None
        ``kind -> (positions, ids)`` where ``ids[i, j]`` is the local id of
        the j-th p-face of top cell ``positions[i]``, or -1 when that face
        has no vertex in the leaf.  Only filled on request (R(k,p)).
    """

    p: int
    index: dict = field(default_factory=dict)
    tuples: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    verts: list = field(default_factory=list)
    boundary: Optional[dict] = None

    def __len__(self):
        return len(self.tuples)


class ExpandedLeaf:
    """Per-leaf expansion: decoded top-cell lists plus memoized relations."""

    def __init__(self, tree, leaf):
        self.tree = tree
        self.leaf = leaf
        self.complex = tree.complex
        self.tops = {kind: lst.decode() for kind, lst in leaf.tops.items()}
        self.p_cells: dict = {}
        self._coboundary: dict = {}

    @property
    def leaf_id(self):
        return self.leaf.leaf_id

    def vertex_ids(self) -> np.ndarray:
        return self.leaf.vertex_ids()

    def in_leaf(self, verts) -> np.ndarray:
        """Elementwise vertex-map membership (range check once reindexed)."""
        a = np.asarray(verts)
        if self.tree.vertices_reindexed:
            return (a >= self.leaf.v_start) & (a < self.leaf.v_end)
        # explicit encoding: test against the leaf's vertex list
        return np.isin(a, self.leaf.vertices)

    def kinds_of_dim(self, k: int) -> list:
        return [kind for kind in self.tops if kind.dim == k]

    def dims(self) -> list:
        return sorted({kind.dim for kind in self.tops})

    def num_tops(self) -> int:
        return sum(len(a) for a in self.tops.values())

    def top_cells(self, kind: CellKind):
        """``(positions, R(k,0) rows, k-indices)`` of the leaf's cells of ``kind``."""
        pos = self.tops.get(kind, np.zeros(0, dtype=np.int64))
        rows = self.complex.cells[kind][pos] if len(pos) else np.zeros((0, kind.nverts), dtype=np.int64)
        off = self.complex.kind_offsets(kind.dim).get(kind, 0)
        return pos, rows, pos + off


class LeafCache:
    """Fixed-capacity least-recently-used cache of expanded leaves."""

    def __init__(self, capacity: int = 16):
        if capacity < 0:
            raise ParameterError("cache capacity must be >= 0")
        self.capacity = capacity
        self._data: OrderedDict = OrderedDict()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        if key in self._data:
            self._data.move_to_end(key)
            self.hits += 1
            return self._data[key]
        self.misses += 1
        return None

    def put(self, key, value):
        if self.capacity == 0:
            return
        self._data[key] = value
        self._data.move_to_end(key)
        while len(self._data) > self.capacity:
            self._data.popitem(last=False)

    def __contains__(self, key):
        return key in self._data

    def __len__(self):
        return len(self._data)


def visit_leaves(tree, kernel: Callable, cache: Optional[LeafCache] = None,
                 leaves: Optional[Sequence] = None) -> list:
    """Run ``kernel(eleaf, complex)`` on every leaf, depth first.

    ``leaves`` overrides the visiting sequence (useful to replay access
    patterns).  Expanded leaves are taken from / returned to ``cache``;
    with no cache, or capacity 0, each one is discarded after use, so
    ``cache.misses`` counts expansions.  A failing kernel is re-raised as
    :class:`LeafKernelError`.
    """
    out = []
    seq = tree.leaves() if leaves is None else leaves
    for leaf in seq:
        eleaf = cache.get(leaf.leaf_id) if cache is not None else None
        if eleaf is None:
            eleaf = ExpandedLeaf(tree, leaf)
        try:
            out.append(kernel(eleaf, tree.complex))
        except LeafKernelError:
            raise
        except Exception as exc:
            raise LeafKernelError(leaf.leaf_id, exc) from exc
        if cache is not None:
            cache.put(leaf.leaf_id, eleaf)
    return out


# ---------------------------------------------------------------------------
# p-cell extraction
# ---------------------------------------------------------------------------

def _check_budget(eleaf: ExpandedLeaf, p: int, budget) -> None:
    projected = sum(len(pos) * face_count(kind, p) for kind, pos in eleaf.tops.items() if kind.dim >= p)
    if projected > budget:
        raise CapacityError(f"extracting {p}-cells would enumerate {projected} faces (budget {budget})")


def _faces(kind: CellKind, rows: np.ndarray, p: int) -> np.ndarray:
    """(m, F, w) array of p-face vertex rows, in face-local order."""
    if p == kind.dim:
        return rows[:, None, :]
    pos = np.array(face_positions(kind, p), dtype=np.int64)
    return rows[:, pos]


def extract_p_cells(eleaf: ExpandedLeaf, p: int, with_boundary: bool = False,
                    budget=DEFAULT_FACE_BUDGET) -> PCells:
    """Collect every distinct p-face, with a vertex in the leaf, of the leaf's top cells.

    ``p == k`` includes top k-cells themselves.  The result is memoized on
    ``eleaf``; asking again with ``with_boundary`` fills in R(k,p).
    """
    if p < 1:
        raise DimensionError(f"p-cell extraction needs p >= 1, got {p}")
    cached = eleaf.p_cells.get(p)
    if cached is not None and (cached.boundary is not None or not with_boundary):
        return cached
    _check_budget(eleaf, p, budget)
    pc = PCells(p)
    boundary = {} if with_boundary else None
    for kind in eleaf.tops:
        if kind.dim < p:
            continue
        positions, rows, _ = eleaf.top_cells(kind)
        faces = _faces(kind, rows, p)
        m, nf, w = faces.shape
        canon = np.sort(faces, axis=2)
        keep = eleaf.in_leaf(faces).any(axis=2)
        ids = np.full((m, nf), -1, dtype=np.int64)
        fkind = _face_kind(kind, p)
        index = pc.index
        canon_l = canon.tolist()
        faces_l = faces.tolist()
        for i, j in zip(*np.nonzero(keep)):
            key = tuple(canon_l[i][j])
            lid = index.get(key)
            if lid is None:
                lid = index[key] = len(pc.tuples)
                pc.tuples.append(key)
                pc.kinds.append(fkind)
                pc.verts.append(tuple(faces_l[i][j]))
            ids[i, j] = lid
        if boundary is not None:
            boundary[kind] = (positions, ids)
    pc.boundary = boundary
    eleaf.p_cells[p] = pc
    return pc


# ---------------------------------------------------------------------------
# co-boundary relations
# ---------------------------------------------------------------------------

def _group_pairs(keys: np.ndarray, values: np.ndarray, domain) -> dict:
    """{key: [values...]} for every key in ``domain``, values in input order."""
    out = {int(v): [] for v in domain}
    if len(keys) == 0:
        return out
    order = np.argsort(keys, kind="stable")
    ks, vs = keys[order], values[order]
    brk = np.flatnonzero(np.diff(ks)) + 1
    for seg_k, seg_v in zip(np.split(ks, brk), np.split(vs, brk)):
        out[int(seg_k[0])] = seg_v.tolist()
    return out


def restricted_vertex_coboundary(eleaf: ExpandedLeaf, k: int) -> dict:
    """R(0,k) over top k-cells for every vertex of the leaf.

    Returns ``{v: [k-index, ...]}`` with one key per leaf vertex (lists may
    be empty) and cells listed in scan order.
    """
    key = ("r0k", k)
    if key in eleaf._coboundary:
        return eleaf._coboundary[key]
    vs, ts = [], []
    for kind in eleaf.kinds_of_dim(k):
        _, rows, kidx = eleaf.top_cells(kind)
        mask = eleaf.in_leaf(rows)
        r, c = np.nonzero(mask)
        vs.append(rows[r, c].astype(np.int64))
        ts.append(kidx[r])
    keys = np.concatenate(vs) if vs else np.zeros(0, np.int64)
    vals = np.concatenate(ts) if ts else np.zeros(0, np.int64)
    # scan order: kinds in order, then cells ascending
    out = _group_pairs(keys, vals, eleaf.vertex_ids())
    eleaf._coboundary[key] = out
    return out


def vertex_coboundary_by_tops(eleaf: ExpandedLeaf, p: int) -> dict:
    """R(0,p) expressed through top cells: ``{v: {k: [k-index, ...]}}`` for k >= p.

    Each listed top k-cell contains at least one p-face incident in ``v``.
    """
    out = {int(v): {} for v in eleaf.vertex_ids()}
    for k in eleaf.dims():
        if k < p:
            continue
        rel = restricted_vertex_coboundary(eleaf, k)
        for v, lst in rel.items():
            if lst:
                out[v][k] = lst
    return out


def vertex_coboundary_all_p(eleaf: ExpandedLeaf, p: int, budget=DEFAULT_FACE_BUDGET) -> dict:
    """R(0,p) over all p-cells, as ``{v: [local p-cell id, ...]}``.

    The ids refer to ``eleaf.p_cells[p]``.
    """
    key = ("r0p", p)
    if key in eleaf._coboundary:
        return eleaf._coboundary[key]
    pc = extract_p_cells(eleaf, p, budget=budget)
    keys, vals = [], []
    for lid, t in enumerate(pc.tuples):
        for v in t:
            keys.append(v)
            vals.append(lid)
    keys = np.asarray(keys, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.int64)
    if len(keys):
        mask = eleaf.in_leaf(keys)
        keys, vals = keys[mask], vals[mask]
    out = _group_pairs(keys, vals, eleaf.vertex_ids())
    eleaf._coboundary[key] = out
    return out


def general_coboundary(eleaf: ExpandedLeaf, p: int, q: int, budget=DEFAULT_FACE_BUDGET) -> dict:
    """R(p,q) for the leaf's p-cells, by inverting the boundary R(q,p) of its q-cells.

    Keys are local p-cell ids (vertex ids when ``p == 0``); values are local
    q-cell ids of ``eleaf.p_cells[q]``.
    """
    if not 0 <= p < q:
        raise DimensionError(f"general co-boundary needs 0 <= p < q, got p={p}, q={q}")
    key = ("rpq", p, q)
    if key in eleaf._coboundary:
        return eleaf._coboundary[key]
    qc = extract_p_cells(eleaf, q, budget=budget)
    if p == 0:
        src_index = None
        out = {int(v): [] for v in eleaf.vertex_ids()}
    else:
        src = extract_p_cells(eleaf, p, budget=budget)
        src_index = src.index
        out = {lid: [] for lid in range(len(src))}
    for qid, (kind, verts) in enumerate(zip(qc.kinds, qc.verts)):
        if p == 0:
            for v in verts:
                if v in out:
                    out[v].append(qid)
            continue
        seen = set()
        for pos in face_positions(kind, p):
            t = tuple(sorted(verts[j] for j in pos))
            lid = src_index.get(t)
            if lid is not None and lid not in seen:
                seen.add(lid)
                out[lid].append(qid)
    eleaf._coboundary[key] = out
    return out
