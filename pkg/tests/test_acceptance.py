"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line through the ``criterion`` fixture;
the lines are repeated in the pytest terminal summary.
"""
import math
import os
import time
import tracemalloc
from itertools import combinations

import numpy as np

import oracles
from checks import check_halfedges, check_queries, check_relabeling
from conftest import FIXTURES, pinwheel, random_complex, tet_fan
from stellar import (NONMANIFOLD, IndexedComplex, Simplex, gen_grid, gen_halfedge, gen_ia,
                     gen_iastar, indexed_storage_cost, parse_mesh, read_stellar, run_pipeline,
                     spanning_numbers, tree_stats, write_stellar)
from stellar.cli import dump_halfedges, dump_ia, dump_relation
from stellar.errors import StellarError
from stellar.sre import SreList, sre_compress, sre_expand_in_place

KVS = (4, 16, 100, math.inf)


def _copy(cx):
    return IndexedComplex(cx.coords.copy(), {k: a.copy() for k, a in cx.cells.items()})


def _sre_case(vals):
    lst = sre_compress(vals)
    if list(lst.entries) != oracles.sre_greedy(vals):
        return False
    if lst.decode().tolist() != list(vals) or lst.size() != len(vals):
        return False
    folded = SreList()
    for x in vals:
        folded.append(x)
    if folded != lst:
        return False
    for pos in [i for i, e in enumerate(lst.entries) if e < 0]:
        grown = SreList(lst.entries)
        sre_expand_in_place(grown, pos)
        if sorted(grown) != list(vals) or grown.size() != len(vals):
            return False
    return True


def test_criterion_1_sre(criterion):
    t0 = time.perf_counter()
    failures = cases = 0
    for r in range(9):
        for sub in combinations(range(12), r):
            cases += 1
            failures += not _sre_case(sub)
    rng = np.random.default_rng(1)
    for _ in range(10 ** 4):
        n = int(rng.integers(0, 60))
        vals = np.unique(rng.integers(0, int(rng.integers(1, 400)), n)).tolist()
        cases += 1
        failures += not _sre_case(vals)
    anchors = (list(sre_compress([1, 2, 3, 4]).entries) == [-1, 3]
               and list(sre_compress(range(40, 45)).entries) == [-40, 4])
    elapsed = time.perf_counter() - t0
    criterion(1, failures == 0 and anchors and elapsed < 5,
              f"{cases} SRE cases, {failures} failures, anchors {'ok' if anchors else 'wrong'}, "
              f"{elapsed:.2f}s (< 5s)")


def _leaf_count_chi(tree):
    """Spanning numbers from vertex ownership alone: distinct leaves among a cell's vertices."""
    out = []
    for arr in tree.complex.cells.values():
        owners = np.sort(tree.vertex_leaf(arr), axis=1)
        out.append(1 + (np.diff(owners, axis=1) != 0).sum(axis=1))
    return np.concatenate(out)


def test_criterion_2_partition_and_spanning(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    bad = []
    for i in range(50):
        cx = random_complex(rng, max_cells=10 ** 4, drop=0.1)
        kv = KVS[i % 4]
        tree = run_pipeline(cx, kv=kv, encoding=("explicit", "compressed")[i % 2])
        ids = np.concatenate([leaf.vertex_ids() for leaf in tree.leaves()])
        partition = (sum(leaf.num_vertices for leaf in tree.leaves()) == cx.num_vertices
                     and np.array_equal(np.sort(ids), np.arange(cx.num_vertices)))
        per_cell, chi, chi_leaves = spanning_numbers(tree)
        nverts = np.concatenate([np.full(len(a), k.nverts) for k, a in cx.cells.items()])
        bounds = bool(np.all((per_cell >= 1) & (per_cell <= nverts)))
        oracle = np.array_equal(per_cell, _leaf_count_chi(tree))
        if not (partition and bounds and oracle and chi == chi_leaves):
            bad.append(i)
    elapsed = time.perf_counter() - t0
    criterion(2, not bad and elapsed < 30,
              f"50 complexes, failing {bad}, {elapsed:.1f}s (< 30s)")


def test_criterion_3_reindexing(criterion):
    rng = np.random.default_rng(3)
    meshes = [random_complex(rng, max_cells=1500) for _ in range(12)] + [f() for f in FIXTURES.values()]
    failures = []
    for i, cx in enumerate(meshes):
        for kv in KVS:
            try:
                check_relabeling(_copy(cx), kv)
            except AssertionError:
                failures.append((i, kv))
    criterion(3, not failures,
              f"{len(meshes)} complexes x {len(KVS)} kv, relabeling/contiguity failures {failures}")


def test_criterion_4_encoding_economics(criterion):
    explicit = tree_stats(run_pipeline(gen_grid("tri2d", 64, 64), kv=100, encoding="explicit"))
    tree = run_pipeline(gen_grid("tri2d", 64, 64), kv=100, encoding="compressed")
    comp = tree_stats(tree)
    ranges = all(leaf.vertices is None for leaf in tree.leaves())
    ok = (explicit.mu == explicit.chi and comp.mu < comp.chi and comp.mu <= 0.5 * comp.chi
          and ranges)
    criterion(4, ok, f"explicit mu={explicit.mu:.4f} chi={explicit.chi:.4f}; compressed "
                     f"mu={comp.mu:.4f} chi={comp.chi:.4f} ratio={comp.mu / comp.chi:.3f} (<= 0.5); "
                     f"leaf vertex lists ranges: {ranges}")


def test_criterion_5_query_oracles(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    failures = []
    for i in range(25):
        cx = random_complex(rng, max_cells=2000)
        try:
            check_queries(run_pipeline(cx, kv=KVS[i % 4]))
        except AssertionError:
            failures.append(i)
    elapsed = time.perf_counter() - t0
    criterion(5, not failures and elapsed < 60,
              f"25 complexes, oracle mismatches {failures}, {elapsed:.1f}s (< 60s)")


def _dumps(cx, kv):
    tree = run_pipeline(_copy(cx), kv=kv, keep_permutations=True)
    out = []
    for name, gen, dump in (("ia", gen_ia, dump_ia),
                            ("iastar", gen_iastar, lambda t, r: dump_ia(t, r, star=True)),
                            ("halfedge", gen_halfedge, dump_halfedges)):
        try:
            out.append((name, dump(tree, gen(tree))))
        except StellarError as err:
            out.append((name, type(err).__name__))
    return out


def test_criterion_6_generator_equivalence(criterion):
    rng = np.random.default_rng(6)
    meshes = {"tri2d": gen_grid("tri2d", 9, 7), "quad2d": gen_grid("quad2d", 8, 6),
              "tet3d": gen_grid("tet3d", 4, 3, 3), "hex3d": gen_grid("hex3d", 4, 4, 3),
              "torus_quad": gen_grid("torus_quad", 6, 5)}
    meshes.update({name: f() for name, f in FIXTURES.items()})
    meshes.update({f"random{i}": random_complex(rng, max_cells=600) for i in range(6)})
    mismatches, built = [], 0
    for name, cx in meshes.items():
        base = _dumps(cx, math.inf)
        built += sum(not d.endswith("Error") for _, d in base)
        for kv in (4, 64):
            for (gen, want), (_, got) in zip(base, _dumps(cx, kv)):
                if want != got:
                    mismatches.append((name, gen, kv))
    criterion(6, not mismatches,
              f"{len(meshes)} meshes, {built} generator dumps vs kv=inf baseline, "
              f"mismatches {mismatches}")


def test_criterion_7_halfedge_audit(criterion):
    cx = gen_grid("torus_quad", 8, 8)
    he = gen_halfedge(run_pipeline(cx, kv=16))
    check_halfedges(he, cx)
    torus = he.num_boundary() == 0 and cx.num_vertices - he.num_edges() + cx.num_top_cells == 0
    r, c = 7, 5
    open_cx = gen_grid("quad2d", r, c)
    he2 = gen_halfedge(run_pipeline(open_cx, kv=6))
    check_halfedges(he2, open_cx)
    boundary = he2.num_boundary()
    criterion(7, torus and boundary == 2 * (r + c),
              f"torus_quad(8,8) unpaired={he.num_boundary()} "
              f"V-E+F={cx.num_vertices - he.num_edges() + cx.num_top_cells}; "
              f"open {r}x{c} boundary half-edges={boundary} (want {2 * (r + c)})")


def test_criterion_8_iastar_nonmanifold(criterion):
    tree = run_pipeline(pinwheel(), kv=math.inf, keep_permutations=True)
    v = int(np.flatnonzero(tree.provenance["vertex"] == 0)[0])
    clusters = len(gen_iastar(tree).partial_coboundary[2][v])
    tree = run_pipeline(tet_fan(), kv=2, keep_permutations=True)
    res = gen_iastar(tree)
    pv = tree.provenance["vertex"]
    shared = [cof for face, cof in res.nonmanifold.get(3, {}).items()
              if sorted(pv[list(face)].tolist()) == [0, 1, 2]]
    marks = int((res.adjacency[Simplex(3)] == NONMANIFOLD).sum())
    ok = clusters == 2 and len(shared) == 1 and len(shared[0]) == 3 and marks == 3
    criterion(8, ok, f"pinwheel clusters={clusters}; fan shared-triangle cofaces="
                     f"{len(shared[0]) if shared else 0}, non-manifold marks={marks}")


def test_criterion_9_local_memory(criterion):
    cx = gen_grid("tet3d", 32, 32, 4)
    tree = run_pipeline(cx, kv=64)
    run = gen_ia(tree, mode="local", callback=lambda res: None)
    bound = run.max_leaf_tops * 4
    ok = run.aux_peak <= bound and run.aux_peak < cx.num_top_cells
    criterion(9, ok, f"aux peak={run.aux_peak}, max leaf tops x (d+1)={bound}, "
                     f"|ΣT|={cx.num_top_cells}")


def test_criterion_10_serialization(criterion, tmp_path):
    rels = ("pcells:1", "pcells:2", "r0k:3", "rpq:0,3", "rpq:1,2")
    ok = True
    for kv in (8, 64, math.inf):
        for enc in ("explicit", "compressed"):
            tree = run_pipeline(gen_grid("tet3d", 5, 4, 3), kv=kv, encoding=enc,
                                keep_permutations=True)
            path = tmp_path / f"t{kv}{enc}.stellar"
            write_stellar(tree, path)
            back = read_stellar(path)
            ok &= tree_stats(tree).to_json() == tree_stats(back).to_json()
            ok &= all(dump_relation(tree, r) == dump_relation(back, r) for r in rels)
    criterion(10, bool(ok), f"3 kv x 2 encodings, stats JSON and {len(rels)} relation dumps identical")


def test_criterion_11_performance(criterion):
    cx = gen_grid("tri2d", 707, 708)
    base = cx.coords.nbytes + sum(a.nbytes for a in cx.cells.values())
    budget = 8 * 4 * indexed_storage_cost(cx)
    tracemalloc.start()
    t0 = time.perf_counter()
    tree = run_pipeline(cx, kv=100, encoding="compressed")
    elapsed = time.perf_counter() - t0
    peak = tracemalloc.get_traced_memory()[1] + base
    tracemalloc.stop()
    phases = ", ".join(f"{k}={v:.1f}s" for k, v in tree.timings.items() if k != "total")
    criterion(11, elapsed < 120 and peak < budget,
              f"{cx.num_top_cells} triangles in {elapsed:.1f}s (< 120s) [{phases}]; "
              f"peak {peak / 1e6:.0f} MB < {budget / 1e6:.0f} MB")


def test_criterion_12_dataset(criterion, acceptance_skip):
    path = os.environ.get("STELLAR_DATASET")
    if not path:
        acceptance_skip(12, "set STELLAR_DATASET to a large triangle mesh")
    parts, ok = [], True
    for kv in (100, 500):
        s = tree_stats(run_pipeline(parse_mesh(path), kv=kv))
        ok &= 0.8 <= s.chi <= 2.2 and s.mu < 0.4
        parts.append(f"kv={kv} chi={s.chi:.3f} mu={s.mu:.3f}")
    criterion(12, ok, f"{os.path.basename(path)}: " + "; ".join(parts))
