"""Brute-force reference implementations used by the tests.

Nothing here imports the face tables or query code under test; faces of
cubes are derived from corner coordinates, faces of simplices from
combinations.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import combinations, product

import numpy as np

from stellar.complex import IndexedComplex

# corner coordinates of the stored vertex positions (see the complex docstring)
CORNERS = {
    1: [(0,), (1,)],
    2: [(0, 0), (1, 0), (1, 1), (0, 1)],
    3: [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
}

# documented facet slot order
CUBE_FACET_SLOTS = {
    1: [(0,), (1,)],
    2: [(0, 1), (1, 2), (2, 3), (3, 0)],
    3: [(0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)],
}


def sre_greedy(sorted_list):
    """Reference SRE: zero as literal, maximal runs of length >= 3, literals otherwise."""
    out = []
    vals = list(sorted_list)
    i = 0
    if vals and vals[0] == 0:
        out.append(0)
        i = 1
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[j + 1] == vals[j] + 1:
            j += 1
        if j - i + 1 >= 3:
            out += [-vals[i], j - i]
        else:
            out += vals[i:j + 1]
        i = j + 1
    return out


def faces_of(kind, verts, p):
    """Set of p-faces (sorted tuples) of one cell, including the cell if p == dim."""
    verts = list(verts)
    k = kind.dim
    if p == k:
        return {tuple(sorted(verts))}
    if p > k or p < 0:
        return set()
    if kind.is_simplex:
        return {tuple(sorted(c)) for c in combinations(verts, p + 1)}
    corners = CORNERS[k]
    out = set()
    for free in combinations(range(k), p):
        fixed = [a for a in range(k) if a not in free]
        for vals in product((0, 1), repeat=len(fixed)):
            face = [verts[i] for i, c in enumerate(corners)
                    if all(c[a] == x for a, x in zip(fixed, vals))]
            out.add(tuple(sorted(face)))
    return out


def top_cells(cx: IndexedComplex):
    """Yield ``(k, kindex, kind, verts)`` over all top cells, in k-index order."""
    for k in cx.dims():
        idx = 0
        for kind in cx.kinds_of_dim(k):
            for row in cx.cells[kind].tolist():
                yield k, idx, kind, row
                idx += 1


def all_p_cells(cx, p):
    out = set()
    for _, _, kind, row in top_cells(cx):
        out |= faces_of(kind, row, p)
    return out


def vertex_star(cx, k):
    """v -> sorted k-indices of the top k-cells incident in v."""
    out = defaultdict(list)
    for kk, idx, _, row in top_cells(cx):
        if kk == k:
            for v in row:
                out[v].append(idx)
    return {v: sorted(ids) for v, ids in out.items()}


def vertex_all_p(cx, p):
    """v -> set of p-cell tuples incident in v."""
    out = defaultdict(set)
    for t in all_p_cells(cx, p):
        for v in t:
            out[v].add(t)
    return out


def coboundary(cx, p, q):
    """p-cell tuple -> set of q-cell tuples having it as a face.

    Within one top cell, the p-faces contained in a q-face are exactly the
    p-faces of that q-face.
    """
    out = defaultdict(set)
    for _, _, kind, row in top_cells(cx):
        pf = faces_of(kind, row, p)
        for pt in pf:
            out.setdefault(pt, set())
        for qt in faces_of(kind, row, q):
            qs = set(qt)
            for pt in pf:
                if qs.issuperset(pt):
                    out[pt].add(qt)
    return out


def facet_slots(kind, verts):
    """Facets of a top cell in slot order."""
    if kind.is_simplex:
        return [tuple(sorted(v for j, v in enumerate(verts) if j != i)) for i in range(len(verts))]
    return [tuple(sorted(verts[j] for j in f)) for f in CUBE_FACET_SLOTS[kind.dim]]


def adjacency(cx, k):
    """k-index -> list of slot values: neighbor k-index, 'b' or 'n'."""
    owners = defaultdict(list)
    cells = [(idx, kind, row) for kk, idx, kind, row in top_cells(cx) if kk == k]
    for idx, kind, row in cells:
        for t in facet_slots(kind, row):
            owners[t].append(idx)
    out = {}
    for idx, kind, row in cells:
        slots = []
        for t in facet_slots(kind, row):
            o = owners[t]
            if len(o) == 1:
                slots.append("b")
            elif len(o) == 2:
                slots.append(o[0] if o[1] == idx else o[1])
            else:
                slots.append("n")
        out[idx] = slots
    return out, {t: sorted(o) for t, o in owners.items() if len(o) > 2}


def cluster_count(cx, v, k):
    """Number of connected groups of top k-cells at v, linked through shared (k-1)-faces at v."""
    cells = [(idx, kind, row) for kk, idx, kind, row in top_cells(cx) if kk == k and v in row]
    if not cells:
        return 0
    parent = list(range(len(cells)))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    facets = [set(t for t in facet_slots(kind, row) if v in t) for _, kind, row in cells]
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if facets[i] & facets[j]:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(len(cells))})


def relabel_multiset(cx):
    """Multiset of (kind, sorted coordinate tuples) for every top cell; numbering-free."""
    out = []
    for kind, arr in cx.cells.items():
        for row in arr.tolist():
            out.append((str(kind), tuple(sorted(tuple(cx.coords[v].tolist()) for v in row))))
    return sorted(out)


def brute_cliques(points, eps):
    """Maximal cliques by enumerating every vertex subset."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    close = [[i != j and np.linalg.norm(pts[i] - pts[j]) < eps for j in range(n)] for i in range(n)]
    cliques = []
    for r in range(1, n + 1):
        for sub in combinations(range(n), r):
            if all(close[a][b] for a, b in combinations(sub, 2)):
                cliques.append(set(sub))
    maximal = [c for c in cliques if not any(c < d for d in cliques)]
    return sorted(tuple(sorted(c)) for c in maximal)
