"""Indexed representation of Canonical Polytope (CP) complexes.

A CP complex is stored as a vertex coordinate array plus one array of
top cells per cell kind.  Row ``i`` of ``cells[kind]`` is the boundary
relation R(k,0) of the ``i``-th top cell of that kind.

Vertex ordering conventions for cubical cells::

    quad (Cube(2))        hexahedron (Cube(3))

    3 ---- 2                 7 ------ 6
    |      |                /|       /|
    |      |               4 ------ 5 |
    0 ---- 1               | 3 -----|-2
                           |/       |/
                           0 ------ 1

Quads are stored in cyclic boundary order.  Hexahedra list the bottom face
counter-clockwise, then the top face counter-clockwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import CellIndexError, DimensionError, MalformedCellError

__all__ = [
    "CellKind",
    "Simplex",
    "Cube",
    "IndexedComplex",
    "build_indexed_complex",
    "complex_from_soup",
    "boundary_faces",
    "face_positions",
    "face_count",
    "canonical_tuple",
    "indexed_storage_cost",
    "INDEX_DTYPE",
    "MAX_CUBE_DIM",
]

INDEX_DTYPE = np.int32
MAX_CUBE_DIM = 3

SIMPLEX = "simplex"
CUBE = "cube"


@dataclass(frozen=True)
class CellKind:
    """Shape tag plus cell dimension, e.g. ``CellKind("cube", 3)`` for a hexahedron."""

    shape: str
    dim: int

    def __post_init__(self):
        if self.shape not in (SIMPLEX, CUBE):
            raise MalformedCellError(f"unknown cell shape {self.shape!r}")
        if self.dim < 0:
            raise DimensionError(f"negative cell dimension {self.dim}")
        if self.shape == CUBE and not 1 <= self.dim <= MAX_CUBE_DIM:
            raise DimensionError(f"cubes are supported for 1 <= k <= {MAX_CUBE_DIM}, got {self.dim}")

    @property
    def nverts(self) -> int:
        return self.dim + 1 if self.shape == SIMPLEX else 2 ** self.dim

    @property
    def is_simplex(self) -> bool:
        return self.shape == SIMPLEX

    def sort_key(self):
        return (self.dim, 0 if self.shape == SIMPLEX else 1)

    def __str__(self):
        return f"{self.shape}{self.dim}"


def Simplex(k: int) -> CellKind:
    return CellKind(SIMPLEX, k)


def Cube(k: int) -> CellKind:
    return CellKind(CUBE, k)


# ---------------------------------------------------------------------------
# face tables
# ---------------------------------------------------------------------------

_CUBE_FACETS = {
    1: ((0,), (1,)),
    2: ((0, 1), (1, 2), (2, 3), (3, 0)),
    3: ((0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)),
}

# position -> corner of the unit cube, used by tests and documentation
CUBE_CORNERS = {
    1: ((0,), (1,)),
    2: ((0, 0), (1, 0), (1, 1), (0, 1)),
    3: ((0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
        (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),
}


@lru_cache(maxsize=None)
def face_positions(kind: CellKind, p: int) -> tuple:
    """Vertex positions of every ``p``-face of a cell of ``kind``.

    The face order fixes the face-local index.  Facets (``p = k-1``) of a
    simplex are listed by opposite vertex: face ``i`` omits position ``i``.
    Lower-dimensional simplex faces come in lexicographic order of
    positions.  Cube faces follow the facet tables and, below the facets,
    first-encounter order of a recursive walk over the facets.
    """
    k = kind.dim
    if not 0 <= p < k:
        raise DimensionError(f"face dimension {p} must satisfy 0 <= p < {k}")
    if kind.is_simplex:
        if p == k - 1:
            return tuple(tuple(j for j in range(k + 1) if j != i) for i in range(k + 1))
        return tuple(combinations(range(k + 1), p + 1))
    facets = _CUBE_FACETS[k]
    if p == k - 1:
        return facets
    seen = set()
    out = []
    for facet in facets:
        for sub in face_positions(Cube(k - 1), p):
            face = tuple(facet[j] for j in sub)
            key = frozenset(face)
            if key not in seen:
                seen.add(key)
                out.append(face)
    return tuple(out)


def face_count(kind: CellKind, p: int) -> int:
    """Number of ``p``-faces of a cell of ``kind``; ``p == k`` counts the cell itself."""
    k = kind.dim
    if p == k:
        return 1
    if not 0 <= p < k:
        return 0
    if kind.is_simplex:
        return comb(k + 1, p + 1)
    return 2 ** (k - p) * comb(k, p)


def face_kind(kind: CellKind, p: int) -> CellKind:
    return CellKind(kind.shape, p) if (kind.shape == SIMPLEX or p >= 1) else Simplex(0)


def boundary_faces(kind: CellKind, verts: Sequence[int], p: int) -> list:
    """Return ``[(face_local_index, vertex_tuple), ...]`` for the ``p``-faces of a cell."""
    if len(verts) != kind.nverts:
        raise MalformedCellError(f"{kind} needs {kind.nverts} vertices, got {len(verts)}")
    return [(i, tuple(verts[j] for j in pos)) for i, pos in enumerate(face_positions(kind, p))]


def canonical_tuple(verts: Iterable[int]) -> tuple:
    """Sorted vertex tuple; two cells are the same cell iff their tuples are equal."""
    t = tuple(sorted(int(v) for v in verts))
    if not t:
        raise MalformedCellError("empty vertex tuple")
    for a, b in zip(t, t[1:]):
        if a == b:
            raise MalformedCellError(f"duplicate vertex {a} in {t}")
    return t


# ---------------------------------------------------------------------------
# indexed complex
# ---------------------------------------------------------------------------

@dataclass
class IndexedComplex:
    """Vertices plus per-kind top-cell arrays.

    Parameters
    ----------
    coords : (V, n) float64
        Vertex positions in the ambient space.
    cells : dict
        ``CellKind -> (m, nverts) int`` array of vertex indices.
    """

    coords: np.ndarray
    cells: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 2:
            raise DimensionError("coords must be a 2-D array (V, n)")
        ordered = {}
        for kind in sorted(self.cells, key=CellKind.sort_key):
            arr = np.ascontiguousarray(self.cells[kind], dtype=INDEX_DTYPE)
            if arr.size == 0:
                continue
            ordered[kind] = arr.reshape(-1, kind.nverts)
        self.cells = ordered

    # ---- sizes -------------------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        return self.coords.shape[1]

    @property
    def num_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def kinds(self) -> list:
        return list(self.cells)

    @property
    def complex_dim(self) -> int:
        return max((k.dim for k in self.cells), default=0)

    @property
    def num_top_cells(self) -> int:
        return sum(a.shape[0] for a in self.cells.values())

    def dims(self) -> list:
        return sorted({k.dim for k in self.cells})

    def kinds_of_dim(self, k: int) -> list:
        return [kind for kind in self.cells if kind.dim == k]

    def num_cells_of_dim(self, k: int) -> int:
        return sum(self.cells[kind].shape[0] for kind in self.kinds_of_dim(k))

    def kind_offsets(self, k: int) -> dict:
        """Offsets that concatenate all kinds of dimension ``k`` into one numbering.

        A top k-cell is addressed globally by its *k-index*,
        ``offset[kind] + position``; simplices come before cubes.
        """
        out, acc = {}, 0
        for kind in self.kinds_of_dim(k):
            out[kind] = acc
            acc += self.cells[kind].shape[0]
        return out

    def cell_at(self, k: int, kindex: int):
        """Inverse of :meth:`kind_offsets`: k-index -> ``(kind, position)``."""
        for kind, off in self.kind_offsets(k).items():
            m = self.cells[kind].shape[0]
            if off <= kindex < off + m:
                return kind, kindex - off
        raise CellIndexError(f"no top {k}-cell with index {kindex}")

    def is_pure(self) -> bool:
        return len(self.dims()) <= 1

    def copy(self) -> "IndexedComplex":
        return IndexedComplex(self.coords.copy(), {k: a.copy() for k, a in self.cells.items()})

    def validate(self) -> None:
        nv = self.num_vertices
        for kind, arr in self.cells.items():
            if arr.shape[1] != kind.nverts:
                raise MalformedCellError(f"{kind} rows need {kind.nverts} vertices")
            if arr.size and (arr.min() < 0 or arr.max() >= nv):
                raise CellIndexError(f"{kind} array references a vertex outside [0, {nv})")
            if kind.nverts > 1:
                s = np.sort(arr, axis=1)
                if np.any(s[:, 1:] == s[:, :-1]):
                    raise MalformedCellError(f"{kind} cell with a repeated vertex")


def build_indexed_complex(ambient_dim: int, vertex_coords, cell_soup) -> IndexedComplex:
    """Bucket a list of ``(CellKind, vertex_tuple)`` pairs per kind.

    Input order is preserved inside every bucket.
    """
    coords = np.asarray(vertex_coords, dtype=np.float64)
    if coords.size == 0:
        coords = coords.reshape(0, ambient_dim)
    if coords.ndim != 2 or coords.shape[1] != ambient_dim:
        raise DimensionError(f"every vertex needs {ambient_dim} coordinates")
    nv = coords.shape[0]
    buckets: dict = {}
    for kind, verts in cell_soup:
        verts = tuple(int(v) for v in verts)
        if len(verts) != kind.nverts:
            raise MalformedCellError(f"{kind} needs {kind.nverts} vertices, got {len(verts)}")
        for v in verts:
            if not 0 <= v < nv:
                raise CellIndexError(f"vertex index {v} outside [0, {nv})")
        if len(set(verts)) != len(verts):
            raise MalformedCellError(f"repeated vertex in {verts}")
        buckets.setdefault(kind, []).append(verts)
    cells = {kind: np.array(rows, dtype=INDEX_DTYPE) for kind, rows in buckets.items()}
    return IndexedComplex(coords, cells)


def complex_from_soup(ambient_dim: int, soup) -> IndexedComplex:
    """Index a soup of ``(CellKind, coordinate rows)`` cells.

    Vertices are merged only when their coordinates are bitwise identical.
    """
    index: dict = {}
    coords = []
    cells = []
    for kind, pts in soup:
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, ambient_dim)
        verts = []
        for row in pts:
            key = row.tobytes()
            v = index.get(key)
            if v is None:
                v = index[key] = len(coords)
                coords.append(row)
            verts.append(v)
        cells.append((kind, verts))
    arr = np.array(coords, dtype=np.float64).reshape(-1, ambient_dim)
    return build_indexed_complex(ambient_dim, arr, cells)


def indexed_storage_cost(cx: IndexedComplex) -> int:
    """References used by the indexed complex: ``n|V|`` coordinates plus every R(k,0) entry."""
    return cx.ambient_dim * cx.num_vertices + sum(int(a.size) for a in cx.cells.values())
