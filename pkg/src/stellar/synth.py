"""Synthetic complexes: structured grids, Sierpinski filtering, Vietoris-Rips.

All generators are deterministic given their arguments (and seed).
"""
from __future__ import annotations

import warnings
from itertools import permutations, product

import networkx as nx
import numpy as np

from .complex import INDEX_DTYPE, Cube, IndexedComplex, Simplex
from .errors import CapacityError, ParameterError

__all__ = ["gen_grid", "gen_sierpinski", "gen_vrips", "refinement_template", "GRID_KINDS",
           "EmptySurvivorWarning"]


class EmptySurvivorWarning(UserWarning):
    """Sierpinski filtering removed every simplex."""


GRID_KINDS = ("tri2d", "quad2d", "tet3d", "hex3d", "torus_quad", "torus_tet")

# Kuhn split of the unit cube: one tetrahedron per axis order, each running
# along the main diagonal from corner 000 to corner 111
_KUHN_TETS = []
for _perm in permutations(range(3)):
    _p = [0, 0, 0]
    _path = [(0, 0, 0)]
    for _ax in _perm:
        _p[_ax] = 1
        _path.append(tuple(_p))
    _KUHN_TETS.append(_path)


def _check_dims(dims, n, minimum=1):
    if len(dims) != n:
        raise ParameterError(f"expected {n} grid dimensions, got {len(dims)}")
    if any(int(d) < minimum for d in dims):
        raise ParameterError(f"grid dimensions must be >= {minimum}, got {tuple(dims)}")
    return [int(d) for d in dims]


def gen_grid(kind: str, *dims) -> IndexedComplex:
    """Regular grid complexes.

    ``tri2d(r, c)``  every square split into two triangles along its
    (0,0)-(1,1) diagonal, counter-clockwise.
    ``quad2d(r, c)``  one quad per square.
    ``tet3d(r, c, s)``  every cube split into the six Kuhn tetrahedra
    sharing its main diagonal (conforming across cubes).
    ``hex3d(r, c, s)``  one hexahedron per cube.
    ``torus_quad(r, c)``  quad grid wrapped in both directions and embedded
    as a torus of revolution in 3D (needs r, c >= 3).
    ``torus_tet(r, c, s)``  Kuhn tetrahedra on a grid wrapped in all three
    directions: a closed 3-manifold.  Vertices keep their grid positions.
    """
    if kind == "tri2d":
        r, c = _check_dims(dims, 2)
        coords, idx = _lattice((c + 1, r + 1))
        a, b, d, e = (idx[:-1, :-1], idx[1:, :-1], idx[:-1, 1:], idx[1:, 1:])
        tris = np.stack([np.stack([a, b, e], -1), np.stack([a, e, d], -1)], axis=2).reshape(-1, 3)
        return IndexedComplex(coords, {Simplex(2): tris})
    if kind == "quad2d":
        r, c = _check_dims(dims, 2)
        coords, idx = _lattice((c + 1, r + 1))
        q = np.stack([idx[:-1, :-1], idx[1:, :-1], idx[1:, 1:], idx[:-1, 1:]], -1).reshape(-1, 4)
        return IndexedComplex(coords, {Cube(2): q})
    if kind == "tet3d":
        r, c, s = _check_dims(dims, 3)
        coords, idx = _lattice((c + 1, r + 1, s + 1))
        return IndexedComplex(coords, {Simplex(3): _kuhn(idx, (c, r, s))})
    if kind == "hex3d":
        r, c, s = _check_dims(dims, 3)
        coords, idx = _lattice((c + 1, r + 1, s + 1))
        corners = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
        h = np.stack([idx[x:x + c, y:y + r, z:z + s] for x, y, z in corners], -1).reshape(-1, 8)
        return IndexedComplex(coords, {Cube(3): h})
    if kind == "torus_quad":
        r, c = _check_dims(dims, 2, minimum=3)
        idx = np.arange(r * c).reshape(r, c)
        u = 2 * np.pi * np.arange(c) / c
        v = 2 * np.pi * np.arange(r) / r
        vv, uu = np.meshgrid(v, u, indexing="ij")
        big, small = 3.0, 1.0
        coords = np.stack([(big + small * np.cos(vv)) * np.cos(uu),
                           (big + small * np.cos(vv)) * np.sin(uu),
                           small * np.sin(vv)], -1).reshape(-1, 3)
        nxt_c, nxt_r = np.roll(idx, -1, axis=1), np.roll(idx, -1, axis=0)
        q = np.stack([idx, nxt_c, np.roll(nxt_c, -1, axis=0), nxt_r], -1).reshape(-1, 4)
        return IndexedComplex(coords, {Cube(2): q})
    if kind == "torus_tet":
        r, c, s = _check_dims(dims, 3, minimum=3)
        coords, idx = _lattice((c, r, s))
        wrapped = np.pad(idx, ((0, 1), (0, 1), (0, 1)), mode="wrap")
        return IndexedComplex(coords, {Simplex(3): _kuhn(wrapped, (c, r, s))})
    raise ParameterError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")


def _lattice(shape):
    """Integer lattice points in C order and the matching index array."""
    grids = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    coords = np.stack([g.ravel() for g in grids], -1).astype(np.float64)
    return coords, idx


def _kuhn(idx, cells):
    c, r, s = cells
    tets = []
    for path in _KUHN_TETS:
        tets.append(np.stack([idx[x:x + c, y:y + r, z:z + s] for x, y, z in path], -1))
    return np.stack(tets, axis=3).reshape(-1, 4)


# ---------------------------------------------------------------------------
# Sierpinski filtering
# ---------------------------------------------------------------------------

def refinement_template(k: int) -> np.ndarray:
    """Barycentric weights (x2) of the 2^k children of the edgewise subdivision.

    Returns an integer array ``W`` of shape ``(2**k, k+1, k+1)``; child
    ``c`` has vertices ``sum_j W[c, i, j] * v_j / 2``.  Children come from
    the Freudenthal triangulation of the doubled Kuhn simplex
    ``{2 >= y_1 >= ... >= y_k >= 0}``.
    """
    if k < 1:
        raise ParameterError("refinement needs k >= 1")
    out = []
    for anchor in product((0, 1), repeat=k):
        for perm in permutations(range(k)):
            y = list(anchor)
            pts = [tuple(y)]
            for ax in perm:
                y[ax] += 1
                pts.append(tuple(y))
            if all(all(2 >= p[i] >= p[i + 1] for i in range(k - 1)) and 2 >= p[0] and p[-1] >= 0
                   for p in pts):
                out.append(pts)
    w = np.zeros((len(out), k + 1, k + 1), dtype=np.int64)
    for ci, pts in enumerate(out):
        for vi, p in enumerate(pts):
            yy = (2,) + p + (0,)
            w[ci, vi] = [yy[j] - yy[j + 1] for j in range(k + 1)]
    if len(out) != 2 ** k:
        raise AssertionError(f"edgewise subdivision produced {len(out)} children")
    return w


def gen_sierpinski(k: int, rounds: int, keep_fraction: float = 0.65, seed: int = 0) -> IndexedComplex:
    """Probabilistic Sierpinski filtering of a k-simplex.

    Starts from the simplex spanned by the origin and the unit vectors of
    R^k.  Each round splits every surviving simplex into its 2^k edgewise
    children and keeps each child independently with probability
    ``keep_fraction``.  Coordinates stay dyadic, so shared vertices merge
    exactly.  If nothing survives, an :class:`EmptySurvivorWarning` is issued
    and an empty complex returned.
    """
    if k < 1 or rounds < 0:
        raise ParameterError("need k >= 1 and rounds >= 0")
    if not 0 < keep_fraction <= 1:
        raise ParameterError("keep_fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    w = refinement_template(k)
    base = np.vstack([np.zeros(k, dtype=np.int64), np.eye(k, dtype=np.int64)])
    simplices = base[None]  # (m, k+1, k) integer coords in units of 2^-round
    for _ in range(rounds):
        children = np.einsum("cij,mjd->mcid", w, simplices).reshape(-1, k + 1, k)
        keep = rng.random(len(children)) < keep_fraction
        simplices = children[keep]
        if len(simplices) == 0:
            warnings.warn("no simplex survived the filtering; returning an empty complex",
                          EmptySurvivorWarning, stacklevel=2)
            return IndexedComplex(np.zeros((0, k)), {})
    pts = simplices.reshape(-1, k)
    uniq, inv = np.unique(pts, axis=0, return_inverse=True)
    coords = uniq.astype(np.float64) / float(2 ** rounds)
    cells = inv.reshape(-1, k + 1).astype(INDEX_DTYPE)
    return IndexedComplex(coords, {Simplex(k): cells})


# ---------------------------------------------------------------------------
# Vietoris-Rips
# ---------------------------------------------------------------------------

def _close_pairs(points: np.ndarray, epsilon: float, block: int = 1024):
    n = len(points)
    eps2 = epsilon * epsilon
    pairs = []
    for s in range(0, n, block):
        chunk = points[s:s + block]
        d2 = ((chunk[:, None, :] - points[None, :, :]) ** 2).sum(-1)
        i, j = np.nonzero(d2 < eps2)
        i = i + s
        keep = i < j
        pairs.append(np.stack([i[keep], j[keep]], -1))
    return np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)


def gen_vrips(points, epsilon: float, max_cliques: int = 10 ** 6) -> IndexedComplex:
    """Vietoris-Rips complex: top simplices are the maximal cliques.

    Points closer than ``epsilon`` (strictly) are joined; a maximal clique
    of size s becomes a top ``Simplex(s-1)``, so isolated points are top
    0-simplices.  More than ``max_cliques`` cliques raises
    :class:`CapacityError`.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ParameterError("points must be an (n, dim) array")
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    g = nx.Graph()
    g.add_nodes_from(range(len(pts)))
    g.add_edges_from(map(tuple, _close_pairs(pts, epsilon).tolist()))
    cliques = []
    for cl in nx.find_cliques(g):
        cliques.append(tuple(sorted(cl)))
        if len(cliques) > max_cliques:
            raise CapacityError(f"more than {max_cliques} maximal cliques")
    cliques.sort(key=lambda t: (len(t), t))
    buckets: dict = {}
    for cl in cliques:
        buckets.setdefault(len(cl) - 1, []).append(cl)
    cells = {Simplex(d): np.array(rows, dtype=INDEX_DTYPE) for d, rows in buckets.items()}
    return IndexedComplex(pts, cells)
