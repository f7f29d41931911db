"""Shared fixtures: small non-manifold complexes and randomized grid complexes."""
import math

import numpy as np
import pytest

from stellar import Cube, IndexedComplex, Simplex, gen_grid

GRID_SHAPES = {"tri2d": 2, "quad2d": 2, "tet3d": 3, "hex3d": 3}


def random_complex(rng, max_cells=2000, kinds=tuple(GRID_SHAPES), drop=0.3):
    """Jittered grid with a random subset of its cells, shuffled cell order and vertex labels."""
    kind = kinds[rng.integers(len(kinds))]
    d = GRID_SHAPES[kind]
    per = 2 if kind == "tri2d" else (6 if kind == "tet3d" else 1)
    side = max(1, int((max_cells / per) ** (1.0 / d)))
    dims = [int(rng.integers(1, side + 1)) for _ in range(d)]
    cx = gen_grid(kind, *dims)
    coords = cx.coords + rng.uniform(-0.2, 0.2, cx.coords.shape)
    (ck, cells), = cx.cells.items()
    keep = rng.random(len(cells)) >= drop
    if not keep.any():
        keep[0] = True
    cells = cells[keep][rng.permutation(int(keep.sum()))]
    vperm = rng.permutation(cx.num_vertices)
    new_coords = np.empty_like(coords)
    new_coords[vperm] = coords
    return IndexedComplex(new_coords, {ck: vperm[cells].astype(np.int32)})


def pinwheel():
    """Two triangles meeting at one vertex."""
    coords = [[0, 0], [1, 0], [1, 1], [-1, 0], [-1, -1]]
    return IndexedComplex(np.array(coords, float), {Simplex(2): np.array([[0, 1, 2], [0, 3, 4]])})


def tet_fan():
    """Three tetrahedra sharing the triangle (0, 1, 2)."""
    coords = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.2, 0.2, 1], [0.2, 0.2, -1], [-1, -1, 0.3]]
    tets = [[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]]
    return IndexedComplex(np.array(coords, float), {Simplex(3): np.array(tets)})


def mixed_complex():
    """Edges, triangles, quads and a tetrahedron glued along shared faces."""
    rng = np.random.default_rng(7)
    coords = rng.random((14, 3)) * 4
    cells = {
        Simplex(1): np.array([[3, 11], [11, 12], [10, 13]]),
        Simplex(2): np.array([[1, 2, 4], [2, 5, 4], [4, 5, 6]]),
        Cube(2): np.array([[5, 6, 7, 8], [8, 7, 9, 10]]),
        Simplex(3): np.array([[0, 1, 2, 3]]),
    }
    return IndexedComplex(coords, cells)


FIXTURES = {"pinwheel": pinwheel, "tet_fan": tet_fan, "mixed": mixed_complex}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(FIXTURES))
def nonmanifold_complex(request):
    return FIXTURES[request.param]()


KVS = (4, 16, 100, math.inf)


# acceptance criteria report: one PASS/FAIL line per criterion, repeated in
# the terminal summary so it shows up without ``-s``
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


@pytest.fixture
def acceptance_skip():
    def skip(number, reason):
        ACCEPTANCE_LINES.append(f"SKIP criterion {number}: {reason}")
        pytest.skip(reason)
    return skip


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
