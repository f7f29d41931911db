import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_cliques, faces_of
from stellar import Cube, Simplex, gen_grid, gen_sierpinski, gen_vrips
from stellar.errors import CapacityError, ParameterError
from stellar.synth import EmptySurvivorWarning, refinement_template


def _euler_2d(cx):
    edges = set()
    for kind, arr in cx.cells.items():
        for row in arr.tolist():
            edges |= faces_of(kind, row, 1)
    return cx.num_vertices - len(edges) + cx.num_top_cells, len(edges)


def test_grid_examples():
    cx = gen_grid("tri2d", 1, 1)
    assert cx.num_vertices == 4 and cx.num_top_cells == 2
    cx = gen_grid("hex3d", 1, 1, 1)
    assert cx.num_vertices == 8 and cx.cells[Cube(3)].shape == (1, 8)
    cx = gen_grid("torus_quad", 8, 8)
    chi, e = _euler_2d(cx)
    assert (cx.num_vertices, e, cx.num_top_cells) == (64, 128, 64) and chi == 0


@pytest.mark.parametrize("kind,dims,cells", [("tri2d", (3, 4), 24), ("quad2d", (3, 4), 12),
                                             ("tet3d", (2, 2, 3), 72), ("hex3d", (2, 2, 3), 12),
                                             ("torus_tet", (3, 3, 3), 162)])
def test_grids_valid_and_conforming(kind, dims, cells):
    cx = gen_grid(kind, *dims)
    cx.validate()
    assert cx.num_top_cells == cells
    (ck, arr), = cx.cells.items()
    # every facet is shared by at most two cells
    count = {}
    for row in arr.tolist():
        for f in faces_of(ck, row, ck.dim - 1):
            count[f] = count.get(f, 0) + 1
    assert max(count.values()) <= 2
    if kind.startswith("torus"):
        assert min(count.values()) == 2


def test_tet_volumes_fill_the_box():
    cx = gen_grid("tet3d", 2, 3, 1)
    p = cx.coords[cx.cells[Simplex(3)]]
    vol = np.abs(np.linalg.det(p[:, 1:] - p[:, :1])) / 6
    assert vol.sum() == pytest.approx(6.0)
    assert np.all(vol > 0)


def test_grid_errors():
    with pytest.raises(ParameterError):
        gen_grid("tri2d", 0, 3)
    with pytest.raises(ParameterError):
        gen_grid("tri2d", 3)
    with pytest.raises(ParameterError):
        gen_grid("torus_quad", 2, 5)
    with pytest.raises(ParameterError):
        gen_grid("prism", 2, 2)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_refinement_children_tile_the_simplex(k):
    w = refinement_template(k)
    assert w.shape == (2 ** k, k + 1, k + 1)
    assert np.all(w.sum(axis=2) == 2)
    # child volumes add up to the parent volume
    base = np.vstack([np.zeros(k), np.eye(k)])
    pts = np.einsum("cij,jd->cid", w, base) / 2
    vol = np.abs(np.linalg.det(pts[:, 1:] - pts[:, :1]))
    assert vol.sum() == pytest.approx(1.0)
    assert np.allclose(vol, vol[0])


def test_sierpinski_examples():
    assert gen_sierpinski(2, 1, 1.0).num_top_cells == 4
    a = gen_sierpinski(2, 2, 1.0)
    assert a.num_top_cells == 16 and a.num_vertices == 15
    b1 = gen_sierpinski(2, 3, 0.65, seed=11)
    b2 = gen_sierpinski(2, 3, 0.65, seed=11)
    assert b1.num_top_cells == b2.num_top_cells
    assert np.array_equal(b1.cells[Simplex(2)], b2.cells[Simplex(2)])
    assert np.array_equal(b1.coords, b2.coords)


def test_sierpinski_empty_result_warns():
    with pytest.warns(EmptySurvivorWarning):
        cx = gen_sierpinski(3, 4, 0.01, seed=0)
    assert cx.num_top_cells == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.floats(0.3, 1.0), st.integers(0, 1000))
def test_sierpinski_is_valid(k, r, f, seed):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySurvivorWarning)
        cx = gen_sierpinski(k, r, f, seed)
    cx.validate()
    if cx.num_top_cells:
        assert cx.dims() == [k]
        # merged vertices: no two vertices share coordinates
        assert len(np.unique(cx.coords, axis=0)) == cx.num_vertices


def test_vrips_examples():
    tri = gen_vrips([[0, 0], [0.1, 0], [0, 0.1]], 0.5)
    assert list(tri.cells) == [Simplex(2)] and tri.num_top_cells == 1
    path = gen_vrips([[0, 0], [1, 0], [2, 0]], 1.5)
    assert list(path.cells) == [Simplex(1)] and path.num_top_cells == 2
    # strict comparison: distance exactly epsilon is not an edge
    iso = gen_vrips([[0, 0], [1, 0]], 1.0)
    assert list(iso.cells) == [Simplex(0)] and iso.num_top_cells == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.2, 0.9))
def test_vrips_matches_power_set(seed, eps):
    pts = np.random.default_rng(seed).random((6, 2))
    cx = gen_vrips(pts, eps)
    got = sorted(tuple(sorted(r)) for a in cx.cells.values() for r in a.tolist())
    assert got == brute_cliques(pts, eps)
    assert np.array_equal(cx.coords, pts)


def test_vrips_budget():
    pts = np.random.default_rng(0).random((40, 2))
    with pytest.raises(CapacityError):
        gen_vrips(pts, 0.3, max_cliques=3)
