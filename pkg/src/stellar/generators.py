"""Generate half-edge and IA / IA* adjacency structures from a Stellar tree.

Every generator streams over the leaves.  In ``global`` mode the output
covers the whole complex and only small per-leaf auxiliary maps are kept
alive; in ``local`` mode each leaf yields its own partial structure
(passed to ``callback`` or collected in a list).

Adjacency slots follow the face-local order of
:func:`stellar.complex.face_positions`: slot ``i`` of a top k-cell is its
i-th (k-1)-face (for simplices, the face opposite vertex ``i``).  A slot
holds the k-index of the adjacent cell or one of the marks below.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .complex import CellKind, face_positions
from .errors import (CorruptionError, DimensionError, NonManifoldEdgeError,
                     OrientationError, ParameterError, PseudoManifoldError)
from .queries import ExpandedLeaf, restricted_vertex_coboundary

__all__ = [
    "BOUNDARY",
    "NONMANIFOLD",
    "UNKNOWN",
    "IAStarStructure",
    "LocalAdjacency",
    "HalfEdgeStructure",
    "LocalHalfEdges",
    "LocalRun",
    "extract_adjacency",
    "gen_ia",
    "gen_iastar",
    "gen_halfedge",
]

BOUNDARY = -1
NONMANIFOLD = -2
UNKNOWN = -3
_UNSET = -4

MODES = ("local", "global")


def _check_mode(mode):
    if mode not in MODES:
        raise ParameterError(f"mode must be 'local' or 'global', got {mode!r}")


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------

@dataclass
class IAStarStructure:
    """IA / IA* connectivity over the whole complex.

    Attributes
    ----------
    adjacency : dict
        ``kind -> (m, facets)`` int64 table; row ``i`` belongs to the i-th
        top cell of that kind.  Entries are k-indices or marks.
    nonmanifold : dict
        ``k -> {canonical (k-1)-tuple: [k-index, ...]}`` for (k-1)-faces
        with more than two top k-cells in their co-boundary: R(k-1,k).
    partial_coboundary : dict
        ``k -> {v: [k-index, ...]}``: one representative per k-cluster of
        ``v`` (the lowest k-index of the cluster).  R*(0,k).
    vertex_edges : dict
        ``v -> [1-index, ...]``: top edges incident in ``v``.  R(0,1).
    """

    adjacency: dict = field(default_factory=dict)
    nonmanifold: dict = field(default_factory=dict)
    partial_coboundary: dict = field(default_factory=dict)
    vertex_edges: dict = field(default_factory=dict)
    aux_peak: int = 0
    wall_time: float = 0.0

    def cluster_counts(self, k: int) -> dict:
        return {v: len(reps) for v, reps in self.partial_coboundary.get(k, {}).items()}

    def num_boundary_slots(self) -> int:
        return int(sum((a == BOUNDARY).sum() for a in self.adjacency.values()))


@dataclass
class LocalAdjacency:
    """Adjacency restricted to one leaf.

    ``tables[kind] = (positions, k_indices, slots)``: one row per top cell
    of the leaf.
    Slots whose face has no vertex in the leaf are ``UNKNOWN``.
    """

    leaf_id: int
    tables: dict = field(default_factory=dict)
    nonmanifold: dict = field(default_factory=dict)
    partial_coboundary: dict = field(default_factory=dict)
    vertex_edges: dict = field(default_factory=dict)
    aux_size: int = 0


@dataclass
class HalfEdgeStructure:
    """Half-edge records as parallel arrays.

    Half-edge ids are ``face_he[f] + i`` for the i-th directed edge of
    2-cell ``f`` (2-index order), so ids do not depend on the tree.
    ``opposite`` is ``BOUNDARY`` on boundary half-edges.
    """

    source: np.ndarray
    face: np.ndarray
    next: np.ndarray
    prev: np.ndarray
    opposite: np.ndarray
    face_he: np.ndarray
    vertex_he: np.ndarray
    aux_peak: int = 0
    wall_time: float = 0.0

    def __len__(self):
        return len(self.source)

    def target(self, h):
        return self.source[self.next[h]]

    def num_boundary(self) -> int:
        return int((self.opposite == BOUNDARY).sum())

    def num_edges(self) -> int:
        paired = int((self.opposite >= 0).sum())
        return paired // 2 + self.num_boundary()


@dataclass
class LocalHalfEdges:
    """Half-edges of the 2-cells indexed by one leaf (local ids).

    ``opposite`` is a local id, ``BOUNDARY``, or ``UNKNOWN`` for edges with
    no vertex in the leaf.  ``vertex_he`` covers the leaf's vertices.
    """

    leaf_id: int
    faces: np.ndarray
    source: np.ndarray
    face: np.ndarray
    next: np.ndarray
    prev: np.ndarray
    opposite: np.ndarray
    face_he: np.ndarray
    vertex_he: dict
    aux_size: int = 0


@dataclass
class LocalRun:
    """Outcome of a local-mode generation pass."""

    leaves: list = field(default_factory=list)
    aux_peak: int = 0
    max_leaf_tops: int = 0
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# top-tops
# ---------------------------------------------------------------------------

def _facet_rows(kind: CellKind, rows: np.ndarray) -> np.ndarray:
    pos = np.array(face_positions(kind, kind.dim - 1), dtype=np.int64)
    return rows[:, pos]


def extract_adjacency(eleaf: ExpandedLeaf, k: int, strict: bool = True, pending=None):
    """Pair top k-cells of a leaf across shared (k-1)-faces.

    Only faces with a vertex in the leaf are processed; all of their
    cofaces are then guaranteed to be in the leaf.  ``pending(kind,
    positions)`` may return a boolean ``(m, facets)`` mask restricting the
    slots to process (used by the global generators).

    Returns ``(tables, nonmanifold, aux_size)`` where
    ``tables[kind] = (positions, k_indices, slots)`` and unprocessed slots
    hold ``UNKNOWN``.  With ``strict`` a face with more than two cofaces
    raises :class:`PseudoManifoldError`.
    """
    facet_top: dict = {}
    tables = {}
    for kind in eleaf.kinds_of_dim(k):
        pos, rows, kidx = eleaf.top_cells(kind)
        faces = _facet_rows(kind, rows)
        slots = np.full(faces.shape[:2], UNKNOWN, dtype=np.int64)
        tables[kind] = (pos, kidx, slots)
        active = eleaf.in_leaf(faces).any(axis=2)
        if pending is not None:
            active &= pending(kind, pos)
        canon = np.sort(faces, axis=2).tolist()
        for i, j in zip(*np.nonzero(active)):
            facet_top.setdefault(tuple(canon[i][j]), []).append((kind, int(i), int(j)))
    aux = len(facet_top)

    nonmanifold = {}
    for tau, cof in facet_top.items():
        if len(cof) == 1:
            kind, i, j = cof[0]
            tables[kind][2][i, j] = BOUNDARY
        elif len(cof) == 2:
            (ka, ia, ja), (kb, ib, jb) = cof
            tables[ka][2][ia, ja] = tables[kb][1][ib]
            tables[kb][2][ib, jb] = tables[ka][1][ia]
        else:
            ids = sorted(int(tables[kd][1][i]) for kd, i, _ in cof)
            if strict:
                raise PseudoManifoldError(f"face {tau} has {len(cof)} cofaces {ids}")
            nonmanifold[tau] = ids
            for kd, i, j in cof:
                tables[kd][2][i, j] = NONMANIFOLD
    return tables, nonmanifold, aux


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        parent = self.parent
        root = x
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _clusters(eleaf: ExpandedLeaf, k: int, star: dict):
    """One representative (lowest k-index) per k-cluster of each leaf vertex.

    Two top k-cells of star(v) are linked when they share a (k-1)-face
    incident in ``v``.  Returns ``({v: [reps]}, aux_size)``.
    """
    shared: dict = {}
    for kind in eleaf.kinds_of_dim(k):
        _, rows, kidx = eleaf.top_cells(kind)
        faces = _facet_rows(kind, rows)
        active = eleaf.in_leaf(faces).any(axis=2)
        canon = np.sort(faces, axis=2).tolist()
        for i, j in zip(*np.nonzero(active)):
            shared.setdefault(tuple(canon[i][j]), []).append(int(kidx[i]))
    uf = _UnionFind()
    in_leaf = eleaf.in_leaf
    for tau, cof in shared.items():
        if len(cof) < 2:
            continue
        mask = in_leaf(np.asarray(tau))
        for v, inside in zip(tau, mask):
            if inside:
                for c in cof[1:]:
                    uf.union((v, cof[0]), (v, c))
    out = {}
    for v, cells in star.items():
        if not cells:
            continue
        reps = sorted({uf.find((v, c))[1] for c in cells})
        out[v] = reps
    return out, len(shared)


# ---------------------------------------------------------------------------
# IA and IA*
# ---------------------------------------------------------------------------

def _leaf_adjacency(eleaf, dims, strict, clusters, pending_for=None):
    """Adjacency, R(k-1,k) and R*(0,k) for one leaf."""
    res = LocalAdjacency(eleaf.leaf_id)
    aux = 0
    for k in dims:
        if k < 1:
            continue
        pending = pending_for(k) if pending_for is not None else None
        tables, nm, a = extract_adjacency(eleaf, k, strict, pending)
        aux = max(aux, a)
        for kind, t in tables.items():
            res.tables[kind] = t
        if nm:
            res.nonmanifold[k] = nm
        star = restricted_vertex_coboundary(eleaf, k)
        if clusters and k >= 2:
            reps, a = _clusters(eleaf, k, star)
            aux = max(aux, a)
            res.partial_coboundary[k] = reps
        elif k == 1 and clusters:
            res.vertex_edges = {v: lst for v, lst in star.items() if lst}
        else:
            # first incident cell in scan order
            res.partial_coboundary[k] = {v: [lst[0]] for v, lst in star.items() if lst}
    res.aux_size = aux
    return res


def _run(tree, mode, callback, dims, strict, clusters):
    _check_mode(mode)
    cx = tree.complex
    t0 = time.perf_counter()
    if mode == "local":
        run = LocalRun()
        for leaf in tree.leaves():
            eleaf = ExpandedLeaf(tree, leaf)
            res = _leaf_adjacency(eleaf, dims, strict, clusters)
            run.aux_peak = max(run.aux_peak, res.aux_size)
            run.max_leaf_tops = max(run.max_leaf_tops, eleaf.num_tops())
            if callback is not None:
                callback(res)
            else:
                run.leaves.append(res)
        run.wall_time = time.perf_counter() - t0
        return run

    out = IAStarStructure()
    for k in dims:
        if k < 1:
            continue
        for kind in cx.kinds_of_dim(k):
            nf = len(face_positions(kind, k - 1))
            out.adjacency[kind] = np.full((cx.cells[kind].shape[0], nf), _UNSET, dtype=np.int64)

    def pending_for(k):
        # skip slots resolved while visiting an earlier leaf
        return lambda kind, pos: out.adjacency[kind][pos] == _UNSET

    for leaf in tree.leaves():
        eleaf = ExpandedLeaf(tree, leaf)
        res = _leaf_adjacency(eleaf, dims, strict, clusters, pending_for)
        out.aux_peak = max(out.aux_peak, res.aux_size)
        for kind, (pos, _, slots) in res.tables.items():
            table = out.adjacency[kind]
            r, c = np.nonzero(slots != UNKNOWN)
            table[pos[r], c] = slots[r, c]
        for k, nm in res.nonmanifold.items():
            out.nonmanifold.setdefault(k, {}).update(nm)
        for k, reps in res.partial_coboundary.items():
            out.partial_coboundary.setdefault(k, {}).update(reps)
        out.vertex_edges.update(res.vertex_edges)
    for kind, table in out.adjacency.items():
        if np.any(table == _UNSET):
            raise CorruptionError(f"unresolved adjacency slots for {kind}")
    for k in list(out.partial_coboundary):
        out.partial_coboundary[k] = dict(sorted(out.partial_coboundary[k].items()))
    out.vertex_edges = dict(sorted(out.vertex_edges.items()))
    out.wall_time = time.perf_counter() - t0
    return out


def gen_ia(tree, mode: str = "global", callback: Optional[Callable] = None):
    """IA structure of a pure pseudo-manifold: R(d,d) plus one top cell per vertex.

    Global mode returns an :class:`IAStarStructure`; local mode returns a
    :class:`LocalRun` of :class:`LocalAdjacency` (or streams them to
    ``callback``).  R*(0,d)(v) is the first incident d-cell in scan order,
    i.e. the lowest d-index.
    """
    cx = tree.complex
    if not cx.is_pure():
        raise PseudoManifoldError(f"IA needs a pure complex, found top cells of dimensions {cx.dims()}")
    return _run(tree, mode, callback, [cx.complex_dim], strict=True, clusters=False)


def gen_iastar(tree, mode: str = "global", callback: Optional[Callable] = None):
    """IA* structure of an arbitrary CP complex.

    For each dimension k with top cells: R(k,k) with non-manifold marks,
    R(k-1,k) for non-manifold faces, R*(0,k) with one representative per
    k-cluster (k >= 2) and R(0,1) over top edges.
    """
    return _run(tree, mode, callback, tree.complex.dims(), strict=False, clusters=True)


# ---------------------------------------------------------------------------
# half-edges
# ---------------------------------------------------------------------------

def _check_polygonal(cx):
    dims = cx.dims()
    if dims and dims != [2]:
        raise DimensionError(f"half-edges need top 2-cells only, found dimensions {dims}")


def _face_layout(cx):
    """Per 2-kind: (k-index offset, arity); and half-edge base per 2-index."""
    arities = []
    for kind in cx.kinds_of_dim(2):
        arities.append(np.full(cx.cells[kind].shape[0], kind.nverts, dtype=np.int64))
    arity = np.concatenate(arities) if arities else np.zeros(0, np.int64)
    base = np.concatenate(([0], np.cumsum(arity)[:-1])) if len(arity) else arity
    return arity, base


def _edge_cofaces_check(eleaf):
    """Raise if an edge with a vertex in the leaf bounds more than two faces."""
    count: dict = {}
    for kind in eleaf.kinds_of_dim(2):
        _, rows, _ = eleaf.top_cells(kind)
        a, b = rows, np.roll(rows, -1, axis=1)
        mask = (eleaf.in_leaf(a) | eleaf.in_leaf(b))
        lo, hi = np.minimum(a, b)[mask].tolist(), np.maximum(a, b)[mask].tolist()
        for e in zip(lo, hi):
            count[e] = count.get(e, 0) + 1
    bad = [e for e, c in count.items() if c > 2]
    if bad:
        raise NonManifoldEdgeError(f"edge {bad[0]} bounds {count[bad[0]]} faces")


def _owned_faces(eleaf, kind):
    """Faces of ``kind`` whose minimum vertex lies in the leaf."""
    _, rows, kidx = eleaf.top_cells(kind)
    keep = eleaf.in_leaf(rows.min(axis=1))
    return rows[keep], kidx[keep]


def gen_halfedge(tree, mode: str = "global", callback: Optional[Callable] = None):
    """Half-edge structure of a polygonal 2-complex (triangles and quads).

    Orientation comes from the stored cyclic vertex order.  Two half-edges
    with the same direction on one edge raise :class:`OrientationError`;
    an edge bounding more than two faces raises
    :class:`NonManifoldEdgeError`.
    """
    _check_mode(mode)
    cx = tree.complex
    _check_polygonal(cx)
    t0 = time.perf_counter()
    if mode == "local":
        run = LocalRun()
        for leaf in tree.leaves():
            eleaf = ExpandedLeaf(tree, leaf)
            res = _local_halfedges(eleaf)
            run.aux_peak = max(run.aux_peak, res.aux_size)
            run.max_leaf_tops = max(run.max_leaf_tops, eleaf.num_tops())
            if callback is not None:
                callback(res)
            else:
                run.leaves.append(res)
        run.wall_time = time.perf_counter() - t0
        return run

    arity, base = _face_layout(cx)
    nhe = int(arity.sum())
    source = np.full(nhe, -1, dtype=np.int64)
    face = np.full(nhe, -1, dtype=np.int64)
    nxt = np.full(nhe, -1, dtype=np.int64)
    prv = np.full(nhe, -1, dtype=np.int64)
    opposite = np.full(nhe, _UNSET, dtype=np.int64)
    edge_he: dict = {}
    peak = 0
    for leaf in tree.leaves():
        eleaf = ExpandedLeaf(tree, leaf)
        _edge_cofaces_check(eleaf)
        for kind in eleaf.kinds_of_dim(2):
            rows, kidx = _owned_faces(eleaf, kind)
            n = kind.nverts
            for row, f in zip(rows.tolist(), kidx.tolist()):
                h0 = int(base[f])
                for i in range(n):
                    h = h0 + i
                    source[h] = row[i]
                    face[h] = f
                    nxt[h] = h0 + (i + 1) % n
                    prv[h] = h0 + (i - 1) % n
                    a, b = row[i], row[(i + 1) % n]
                    key = (a, b) if a < b else (b, a)
                    other = edge_he.pop(key, None)
                    if other is None:
                        edge_he[key] = h
                        continue
                    if source[other] == a:
                        raise OrientationError(f"half-edges {other} and {h} both run {a}->{b}")
                    opposite[h] = other
                    opposite[other] = h
            peak = max(peak, len(edge_he))
    if np.any(face < 0):
        raise CorruptionError("some faces were not owned by any leaf")
    opposite[opposite == _UNSET] = BOUNDARY
    vertex_he = np.full(cx.num_vertices, nhe, dtype=np.int64)
    np.minimum.at(vertex_he, source, np.arange(nhe))
    vertex_he[vertex_he == nhe] = -1
    return HalfEdgeStructure(source, face, nxt, prv, opposite, base.copy(), vertex_he,
                             aux_peak=peak, wall_time=time.perf_counter() - t0)


def _local_halfedges(eleaf) -> LocalHalfEdges:
    _edge_cofaces_check(eleaf)
    src, fc, nx, pv, faces, face_he = [], [], [], [], [], []
    edges = []
    for kind in eleaf.kinds_of_dim(2):
        _, rows, kidx = eleaf.top_cells(kind)
        n = kind.nverts
        for row, f in zip(rows.tolist(), kidx.tolist()):
            h0 = len(src)
            faces.append(f)
            face_he.append(h0)
            for i in range(n):
                src.append(row[i])
                fc.append(len(faces) - 1)
                nx.append(h0 + (i + 1) % n)
                pv.append(h0 + (i - 1) % n)
                edges.append((row[i], row[(i + 1) % n]))
    nhe = len(src)
    source = np.asarray(src, dtype=np.int64)
    opposite = np.full(nhe, UNKNOWN, dtype=np.int64)
    inside = eleaf.in_leaf(np.asarray(edges, dtype=np.int64).reshape(-1, 2)).any(axis=1) if nhe else np.zeros(0, bool)
    edge_he: dict = {}
    peak = 0
    for h, ((a, b), ok) in enumerate(zip(edges, inside.tolist())):
        if not ok:
            continue
        key = (a, b) if a < b else (b, a)
        other = edge_he.pop(key, None)
        if other is None:
            edge_he[key] = h
            peak = max(peak, len(edge_he))
            continue
        if src[other] == a:
            raise OrientationError(f"half-edges {other} and {h} both run {a}->{b}")
        opposite[h] = other
        opposite[other] = h
    for h in edge_he.values():
        opposite[h] = BOUNDARY
    vertex_he = {}
    mask = eleaf.in_leaf(source) if nhe else np.zeros(0, bool)
    for h in np.flatnonzero(mask).tolist():
        vertex_he.setdefault(src[h], h)
    return LocalHalfEdges(eleaf.leaf_id, np.asarray(faces, dtype=np.int64), source,
                          np.asarray(fc, dtype=np.int64), np.asarray(nx, dtype=np.int64),
                          np.asarray(pv, dtype=np.int64), opposite,
                          np.asarray(face_he, dtype=np.int64), vertex_he, aux_size=peak)
