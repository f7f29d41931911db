"""Command-line interface: ``stellar <command> ...``.

Commands
--------
build        run the pipeline on a mesh and write a ``.stellar`` file
stats        tree statistics as JSON or CSV
extract      relation dumps (``pcells:p``, ``r0k:k``, ``rpq:p,q``)
gen-ia, gen-iastar, gen-halfedge
             generated connectivity as text plus a JSON summary
synth        synthetic meshes (``grid``, ``sierpinski``, ``vrips``)

Text dumps always use the numbering of the input mesh (the tree keeps the
permutations applied by reindexing), so they do not depend on ``--kv``.
Errors go to stderr as one JSON object ``{"error": category, "message": ...}``;
exit status is 2 for usage errors and 1 for everything else.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import generators as gen
from .complex import face_positions
from .errors import StellarError, UsageError
from .io import parse_mesh, read_stellar, write_indexed, write_off, write_stellar
from .queries import (DEFAULT_FACE_BUDGET, LeafCache, extract_p_cells, general_coboundary,
                      restricted_vertex_coboundary, visit_leaves)
from .reindex import run_pipeline
from .stats import cost_bytes, timings_row, tree_stats
from .synth import GRID_KINDS, gen_grid, gen_sierpinski, gen_vrips
from .tree import ENCODINGS, SPLIT_MODES

__all__ = ["main", "build_parser", "load_tree", "Numbering", "dump_relation", "dump_ia",
           "dump_halfedges"]


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", f"{self.prog}: {message}")
        sys.exit(2)


def _kv(text):
    if text == "inf":
        return math.inf
    try:
        kv = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"kv must be a positive integer or 'inf', got {text!r}")
    if kv < 1:
        raise argparse.ArgumentTypeError("kv must be >= 1")
    return kv


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def _tree_options(p):
    p.add_argument("--input", required=True, help="mesh (.off/.indexed/.soup) or .stellar file")
    p.add_argument("--input-format", choices=["off", "indexed", "soup", "stellar"], default=None)
    p.add_argument("--kv", type=_kv, default=100, help="bucketing threshold, or 'inf'")
    p.add_argument("--encoding", choices=ENCODINGS, default="compressed")
    p.add_argument("--split", choices=("auto",) + SPLIT_MODES, default="auto")
    p.add_argument("--max-depth", type=_positive, default=64)
    p.add_argument("--cache", type=_positive, default=16, help="expanded-leaf cache capacity")
    p.add_argument("--threads", type=_positive, default=None,
                   help="worker threads (falls back to STELLAR_THREADS; runs are sequential)")
    p.add_argument("--output", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stellar", description="Stellar trees over CP complexes")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="run the pipeline and write a .stellar file")
    _tree_options(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("stats", help="tree statistics")
    _tree_options(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--width", type=_positive, default=4, help="bytes per reference for cost_bytes")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("extract", help="relation dumps")
    _tree_options(p)
    p.add_argument("--relation", required=True, help="pcells:p | r0k:k | rpq:p,q")
    p.add_argument("--budget", type=_positive, default=DEFAULT_FACE_BUDGET)
    p.set_defaults(func=_cmd_extract)

    for name in ("gen-ia", "gen-iastar", "gen-halfedge"):
        p = sub.add_parser(name, help=f"{name[4:]} connectivity")
        _tree_options(p)
        p.add_argument("--mode", choices=gen.MODES, default="global")
        p.add_argument("--summary", default=None, help="JSON summary path (default: stderr)")
        p.set_defaults(func=_cmd_generate, generator=name[4:])

    p = sub.add_parser("synth", help="synthetic meshes")
    ssub = p.add_subparsers(dest="family", required=True, parser_class=_Parser)
    g = ssub.add_parser("grid")
    g.add_argument("kind", choices=GRID_KINDS)
    g.add_argument("dims", type=_positive, nargs="+")
    s = ssub.add_parser("sierpinski")
    s.add_argument("--k", type=_positive, required=True)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--keep", type=float, default=0.65)
    s.add_argument("--seed", type=int, default=0)
    v = ssub.add_parser("vrips")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="whitespace-separated coordinates, one point per line")
    src.add_argument("--random", type=_positive, metavar="N", help="N uniform points in the unit cube")
    v.add_argument("--dim", type=_positive, default=3)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--epsilon", type=float, required=True)
    v.add_argument("--max-cliques", type=_positive, default=10 ** 6)
    for q in (g, s, v):
        q.add_argument("--output", required=True, help="output mesh (.indexed or .off)")
    p.set_defaults(func=_cmd_synth)
    return parser


def _emit_error(category, message):
    sys.stderr.write(json.dumps({"error": category, "message": message}, sort_keys=True) + "\n")


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("STELLAR_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise UsageError(f"STELLAR_THREADS must be a positive integer, got {env!r}")
    if n < 1:
        raise UsageError("STELLAR_THREADS must be a positive integer")
    return n


def _write(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, newline="\n")


# ---------------------------------------------------------------------------
# tree loading and original numbering
# ---------------------------------------------------------------------------

def load_tree(path, input_format=None, kv=100, encoding="compressed", split="auto", max_depth=64):
    """A ``.stellar`` file is read as is; a mesh is run through the pipeline."""
    fmt = input_format or Path(path).suffix.lstrip(".").lower()
    if fmt == "stellar":
        return read_stellar(path)
    cx = parse_mesh(path, fmt)
    return run_pipeline(cx, kv=kv, encoding=encoding, split_mode=split,
                        max_depth=max_depth, keep_permutations=True)


class Numbering:
    """Maps the tree's current ids back to the input numbering."""

    def __init__(self, tree):
        cx = tree.complex
        prov = tree.provenance or {}
        self.vertex = np.asarray(prov.get("vertex", np.arange(cx.num_vertices)), dtype=np.int64)
        self.kindex = {}
        for k in cx.dims():
            parts = []
            for kind, off in cx.kind_offsets(k).items():
                n = cx.cells[kind].shape[0]
                parts.append(off + np.asarray(prov.get(kind, np.arange(n)), dtype=np.int64))
            self.kindex[k] = np.concatenate(parts)

    def tuple(self, verts) -> tuple:
        return tuple(sorted(int(x) for x in self.vertex[list(verts)]))

    def cells(self, k, ids) -> list:
        return sorted(int(x) for x in self.kindex[k][list(ids)])

    def order(self, k) -> np.ndarray:
        """Current k-indices listed in input order."""
        inv = np.empty_like(self.kindex[k])
        inv[self.kindex[k]] = np.arange(len(inv))
        return inv


def _tuple_text(t) -> str:
    return "-".join(map(str, t))


# ---------------------------------------------------------------------------
# relation dumps
# ---------------------------------------------------------------------------

def parse_relation(text: str):
    try:
        name, _, arg = text.partition(":")
        nums = [int(x) for x in arg.split(",")] if arg else []
    except ValueError:
        raise UsageError(f"bad relation {text!r}")
    expected = {"pcells": 1, "r0k": 1, "rpq": 2}
    if name not in expected or len(nums) != expected[name]:
        raise UsageError(f"relation must be pcells:p, r0k:k or rpq:p,q, got {text!r}")
    return name, nums


def dump_relation(tree, relation: str, cache_size: int = 16, budget=DEFAULT_FACE_BUDGET) -> str:
    """Line-oriented dump of one relation, in input numbering.

    ``pcells:p``  one line per p-cell: its sorted vertex ids.
    ``r0k:k``     one line per vertex ``v: k-indices`` of incident top k-cells.
    ``rpq:p,q``   one line per p-cell ``verts: q-cells`` with q-cells written
    as dash-joined vertex tuples.
    """
    name, nums = parse_relation(relation)
    num = Numbering(tree)
    cache = LeafCache(cache_size)
    lines = []
    if name == "pcells":
        p = nums[0]

        def kernel(eleaf, _cx):
            return [num.tuple(t) for t in extract_p_cells(eleaf, p, budget=budget).tuples]

        cells = set()
        for part in visit_leaves(tree, kernel, cache):
            cells.update(part)
        lines = [" ".join(map(str, t)) for t in sorted(cells)]
    elif name == "r0k":
        k = nums[0]
        if k not in tree.complex.dims():
            raise UsageError(f"no top cells of dimension {k}")

        def kernel(eleaf, _cx):
            return [(int(num.vertex[v]), num.cells(k, ids))
                    for v, ids in restricted_vertex_coboundary(eleaf, k).items()]

        rows = [r for part in visit_leaves(tree, kernel, cache) for r in part]
        lines = [f"{v}: " + " ".join(map(str, ids)) for v, ids in sorted(rows)]
    else:
        p, q = nums

        def kernel(eleaf, _cx):
            rel = general_coboundary(eleaf, p, q, budget=budget)
            qt = extract_p_cells(eleaf, q, budget=budget).tuples
            pt = None if p == 0 else extract_p_cells(eleaf, p, budget=budget).tuples
            out = []
            for src, ids in rel.items():
                key = num.tuple([src]) if p == 0 else num.tuple(pt[src])
                out.append((key, {num.tuple(qt[i]) for i in ids}))
            return out

        merged: dict = {}
        for part in visit_leaves(tree, kernel, cache):
            for key, targets in part:
                merged.setdefault(key, set()).update(targets)
        lines = [" ".join(map(str, key)) + ": " + " ".join(_tuple_text(t) for t in sorted(tg))
                 for key, tg in sorted(merged.items())]
    return "".join(line.rstrip() + "\n" for line in lines)


def _slot_text(s, k, num, nm_ids, face_tuple):
    if s >= 0:
        return str(int(num.kindex[k][s]))
    if s == gen.BOUNDARY:
        return "b"
    if s == gen.UNKNOWN:
        return "u"
    return f"n:{nm_ids[face_tuple]}"


def _nonmanifold_ids(num, nonmanifold):
    """Per k: face tuple -> id, and the ``(input tuple, cofaces)`` rows by id."""
    ids, rows = {}, {}
    for k, faces in nonmanifold.items():
        keyed = sorted((num.tuple(t), t, cof) for t, cof in faces.items())
        ids[k] = {t: i for i, (_, t, _) in enumerate(keyed)}
        rows[k] = [(ot, num.cells(k, cof)) for ot, _, cof in keyed]
    return ids, rows


def _adjacency_text(k, kind, row, slots, num, ids):
    fpos = face_positions(kind, k - 1)
    out = []
    for i, s in enumerate(slots.tolist()):
        t = tuple(sorted(row[j] for j in fpos[i])) if s == gen.NONMANIFOLD else None
        out.append(_slot_text(s, k, num, ids, t))
    return " ".join(out)


def dump_ia(tree, result, star: bool = False) -> str:
    """Text dump of an IA / IA* result (global or local), in input numbering.

    Record types: ``c k id: slots`` per top k-cell; ``nm k id: verts :
    cofaces`` per non-manifold (k-1)-face; with ``star``, ``cl k v: count``
    per vertex with k-clusters and ``e v: edges`` for top edges at v.
    Cluster representatives depend on the tree numbering and are left out.
    """
    cx = tree.complex
    num = Numbering(tree)
    lines = []
    if isinstance(result, gen.LocalRun):
        for res in result.leaves:
            lines.append(f"leaf {res.leaf_id}")
            tables = {kind: (pos, slots) for kind, (pos, _, slots) in res.tables.items()}
            lines.extend(_ia_lines(cx, num, tables, res.nonmanifold, res.partial_coboundary,
                                   res.vertex_edges, star))
    else:
        tables = {kind: (np.arange(len(a)), a) for kind, a in result.adjacency.items()}
        lines.extend(_ia_lines(cx, num, tables, result.nonmanifold, result.partial_coboundary,
                               result.vertex_edges, star))
    return "".join(line + "\n" for line in lines)


def _ia_lines(cx, num, tables, nonmanifold, partial, vertex_edges, star):
    ids, nm_rows = _nonmanifold_ids(num, nonmanifold)
    records = []
    for kind, (pos, slots) in tables.items():
        k = kind.dim
        off = cx.kind_offsets(k)[kind]
        rows = cx.cells[kind]
        for p, sl in zip(pos.tolist(), slots):
            orig = int(num.kindex[k][off + p])
            records.append((k, orig, _adjacency_text(k, kind, rows[p].tolist(), sl, num, ids.get(k, {}))))
    lines = [f"c {k} {i}: {s}".rstrip() for k, i, s in sorted(records)]
    for k in sorted(nm_rows):
        for i, (t, cof) in enumerate(nm_rows[k]):
            lines.append(f"nm {k} {i}: {' '.join(map(str, t))} : {' '.join(map(str, cof))}")
    if star:
        for k in sorted(partial):
            counts = sorted((int(num.vertex[v]), len(reps)) for v, reps in partial[k].items() if reps)
            lines.extend(f"cl {k} {v}: {c}" for v, c in counts)
        edges = sorted((int(num.vertex[v]), num.cells(1, e)) for v, e in vertex_edges.items())
        lines.extend(f"e {v}: {' '.join(map(str, e))}" for v, e in edges)
    return lines


def dump_halfedges(tree, result) -> str:
    """Text dump of half-edges: ``h: source target face next prev opposite``.

    Global ids are renumbered to the input numbering (face order, then
    position in the face); local dumps use leaf-local ids per leaf block.
    """
    num = Numbering(tree)
    if isinstance(result, gen.LocalRun):
        lines = []
        for res in result.leaves:
            lines.append(f"leaf {res.leaf_id}")
            fmap = num.kindex[2][res.faces] if len(res.faces) else res.faces
            for h in range(len(res.source)):
                opp = int(res.opposite[h])
                ot = "b" if opp == gen.BOUNDARY else ("u" if opp == gen.UNKNOWN else str(opp))
                tgt = res.source[res.next[h]]
                lines.append(f"{h}: {num.vertex[res.source[h]]} {num.vertex[tgt]} "
                             f"{fmap[res.face[h]]} {res.next[h]} {res.prev[h]} {ot}")
        return "".join(line + "\n" for line in lines)

    base = result.face_he
    nhe = len(result.source)
    fmap = num.kindex[2]
    h_new = np.arange(nhe)
    h_orig = base[fmap[result.face]] + (h_new - base[result.face])

    def m(x):
        return np.where(x >= 0, h_orig[np.maximum(x, 0)], x)
    src = num.vertex[result.source]
    tgt = num.vertex[result.source[result.next]]
    face = fmap[result.face]
    nxt, prv, opp = m(result.next), m(result.prev), m(result.opposite)
    order = np.argsort(h_orig)
    lines = []
    for h in order.tolist():
        o = "b" if opp[h] == gen.BOUNDARY else str(int(opp[h]))
        lines.append(f"{h_orig[h]}: {src[h]} {tgt[h]} {face[h]} {nxt[h]} {prv[h]} {o}")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load(args):
    return load_tree(args.input, args.input_format, args.kv, args.encoding, args.split, args.max_depth)


def _cmd_build(args):
    _threads(args)
    tree = _load(args)
    out = args.output or str(Path(args.input).with_suffix(".stellar"))
    write_stellar(tree, out)
    report = {"output": out, "leaves": tree.num_leaves, "blocks": tree.num_blocks,
              "timings": timings_row(tree)}
    sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")
    return 0


def _cmd_stats(args):
    _threads(args)
    st = tree_stats(_load(args))
    if args.format == "csv":
        _write(args, st.to_csv())
    else:
        d = st.to_dict()
        d["cost_bytes"] = cost_bytes(st.costs, args.width)
        _write(args, json.dumps(d, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_extract(args):
    _threads(args)
    parse_relation(args.relation)
    tree = _load(args)
    _write(args, dump_relation(tree, args.relation, args.cache, args.budget))
    return 0


def _cmd_generate(args):
    threads = _threads(args)
    tree = _load(args)
    if args.generator == "halfedge":
        res = gen.gen_halfedge(tree, args.mode)
        text = dump_halfedges(tree, res)
    else:
        fn = gen.gen_ia if args.generator == "ia" else gen.gen_iastar
        res = fn(tree, args.mode)
        text = dump_ia(tree, res, star=args.generator == "iastar")
    _write(args, text)
    summary = _summary(tree, args, res, threads)
    line = json.dumps(summary, sort_keys=True) + "\n"
    if args.summary:
        Path(args.summary).write_text(line)
    else:
        sys.stderr.write(line)
    return 0


def _summary(tree, args, res, threads):
    cx = tree.complex
    s = {"generator": args.generator, "mode": args.mode, "threads": threads,
         "num_vertices": cx.num_vertices, "num_top_cells": cx.num_top_cells,
         "leaves": tree.num_leaves, "aux_peak": int(res.aux_peak),
         "wall_time": float(res.wall_time)}
    if isinstance(res, gen.LocalRun):
        s["max_leaf_tops"] = res.max_leaf_tops
    elif isinstance(res, gen.HalfEdgeStructure):
        s.update(half_edges=len(res), edges=res.num_edges(), boundary_half_edges=res.num_boundary())
    else:
        s.update(boundary_slots=res.num_boundary_slots(),
                 nonmanifold_faces={str(k): len(v) for k, v in res.nonmanifold.items()},
                 clusters={str(k): sum(len(r) for r in reps.values())
                           for k, reps in res.partial_coboundary.items()})
    return s


def _cmd_synth(args):
    if args.family == "grid":
        cx = gen_grid(args.kind, *args.dims)
    elif args.family == "sierpinski":
        cx = gen_sierpinski(args.k, args.rounds, args.keep, args.seed)
    else:
        if args.points:
            try:
                pts = np.loadtxt(args.points, ndmin=2)
            except ValueError as e:
                raise UsageError(f"cannot read points: {e}")
        else:
            pts = np.random.default_rng(args.seed).random((args.random, args.dim))
        cx = gen_vrips(pts, args.epsilon, args.max_cliques)
    if args.output.endswith(".off"):
        write_off(cx, args.output)
    else:
        write_indexed(cx, args.output)
    sys.stdout.write(json.dumps({"output": args.output, "num_vertices": cx.num_vertices,
                                 "num_top_cells": cx.num_top_cells,
                                 "top_cells_per_kind": {str(k): int(a.shape[0])
                                                        for k, a in cx.cells.items()}},
                                sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        _emit_error(e.category, str(e))
        return 2
    except StellarError as e:
        _emit_error(e.category, str(e))
        return 1
    except OSError as e:
        _emit_error("io", str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
