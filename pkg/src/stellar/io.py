"""Mesh ingestion and the ``.stellar`` binary format.

Text formats are ASCII, whitespace separated, 0-based, ``#`` starts a
comment.

``off``
    Standard OFF.  Polygons of arity 3 become ``simplex2`` cells, arity 4
    ``cube2`` (quads in cyclic order); anything else is refused.
``indexed``
    ``nverts ncells ambient_dim`` on the first line, then one coordinate
    line per vertex, then one ``k kind v0 ... vm`` line per top cell with
    ``kind`` in ``simplex`` / ``cube``.
``soup``
    ``soup ncells ambient_dim``, then one ``kind k x0 y0 ... `` line per
    cell listing the coordinates of its vertices.  Vertices are merged only
    when their coordinates are bitwise identical.

``.stellar`` layout (little endian)::

    b"STELLAR\\0"  u32 version  u32 header_bytes  <JSON header>
    f64 coords[V, n]
    i32 cells[m, nverts]                 one block per kind, header order
    i64 hierarchy[...]                   pre-order block records
    i64 provenance[...]                  optional: vertex, then per kind

A hierarchy record is ``0`` followed by one presence flag per child for an
internal block, or ``1`` for a leaf followed by its vertex map
(``v_start v_end``, or a count and explicit ids) and, per kind, an entry
count and the raw SRE entries.
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .complex import CellKind, IndexedComplex, build_indexed_complex, complex_from_soup
from .errors import (CorruptionError, EmptyComplexError, FormatError, ParseError,
                     StellarError, UnsupportedCellError)
from .sre import SreList
from .tree import Block, StellarTree

__all__ = [
    "parse_mesh",
    "write_indexed",
    "write_off",
    "write_stellar",
    "read_stellar",
    "MAGIC",
    "FORMAT_VERSION",
]

MAGIC = b"STELLAR\0"
FORMAT_VERSION = 1
FORMATS = ("off", "indexed", "soup")


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

def _tokens(path):
    """Yield ``(line_number, tokens)`` for non-empty, comment-stripped lines."""
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _next(it, what):
    try:
        return next(it)
    except StopIteration:
        raise ParseError(f"unexpected end of file while reading {what}") from None


def _ints(tokens, lineno, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integers for {what}: {' '.join(tokens)}", lineno) from None


def _floats(tokens, lineno, what):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected numbers for {what}: {' '.join(tokens)}", lineno) from None


def _parse_off(path) -> IndexedComplex:
    it = _tokens(path)
    lineno, tok = _next(it, "header")
    if not tok[0].endswith("OFF"):
        raise ParseError("missing OFF header", lineno)
    rest = tok[1:]
    if not rest:
        lineno, rest = _next(it, "counts")
    counts = _ints(rest[:3], lineno, "counts")
    if len(counts) < 2:
        raise ParseError("counts line needs vertex and face counts", lineno)
    nv, nf = counts[0], counts[1]
    coords = []
    for _ in range(nv):
        lineno, tok = _next(it, "vertices")
        xyz = _floats(tok[:3], lineno, "vertex")
        if len(xyz) != 3:
            raise ParseError("vertex line needs 3 coordinates", lineno)
        coords.append(xyz)
    soup = []
    for _ in range(nf):
        lineno, tok = _next(it, "faces")
        vals = _ints(tok, lineno, "face")
        n = vals[0]
        if len(vals) < n + 1:
            raise ParseError(f"face lists {len(vals) - 1} vertices, expected {n}", lineno)
        if n == 3:
            kind = CellKind("simplex", 2)
        elif n == 4:
            kind = CellKind("cube", 2)
        else:
            raise UnsupportedCellError(f"polygons with {n} vertices are not supported", lineno)
        soup.append((kind, vals[1:n + 1], lineno))
    return _checked_build(3, coords, soup)


def _checked_build(ambient_dim, coords, soup):
    """Build the complex, reporting the offending line on bad cells."""
    nv = len(coords)
    for kind, verts, lineno in soup:
        if any(not 0 <= v < nv for v in verts):
            raise ParseError(f"vertex index out of range [0, {nv})", lineno)
        if len(set(verts)) != len(verts):
            raise ParseError("repeated vertex in cell", lineno)
    arr = np.asarray(coords, dtype=np.float64).reshape(-1, ambient_dim)
    return build_indexed_complex(ambient_dim, arr, [(k, v) for k, v, _ in soup])


def _parse_kind(shape, dim, lineno):
    try:
        k = int(dim)
    except ValueError:
        raise ParseError(f"bad cell dimension {dim!r}", lineno) from None
    try:
        return CellKind(shape, k)
    except StellarError as exc:
        raise UnsupportedCellError(str(exc), lineno) from None


def _parse_indexed(path) -> IndexedComplex:
    it = _tokens(path)
    lineno, tok = _next(it, "counts")
    counts = _ints(tok, lineno, "counts")
    if len(counts) != 3:
        raise ParseError("counts line must be 'nverts ncells ambient_dim'", lineno)
    nv, nc, n = counts
    coords = []
    for _ in range(nv):
        lineno, tok = _next(it, "vertices")
        xs = _floats(tok, lineno, "vertex")
        if len(xs) != n:
            raise ParseError(f"vertex needs {n} coordinates, got {len(xs)}", lineno)
        coords.append(xs)
    soup = []
    for _ in range(nc):
        lineno, tok = _next(it, "cells")
        if len(tok) < 2:
            raise ParseError("cell line needs a dimension and a kind", lineno)
        kind = _parse_kind(tok[1], tok[0], lineno)
        verts = _ints(tok[2:], lineno, "cell")
        if len(verts) != kind.nverts:
            raise ParseError(f"{kind} needs {kind.nverts} vertices, got {len(verts)}", lineno)
        soup.append((kind, verts, lineno))
    return _checked_build(n, coords, soup)


def _parse_soup(path) -> IndexedComplex:
    it = _tokens(path)
    lineno, tok = _next(it, "header")
    if tok[0] != "soup" or len(tok) != 3:
        raise ParseError("header must be 'soup ncells ambient_dim'", lineno)
    nc, n = _ints(tok[1:], lineno, "header")
    soup = []
    for _ in range(nc):
        lineno, tok = _next(it, "cells")
        if len(tok) < 2:
            raise ParseError("cell line needs a kind and a dimension", lineno)
        kind = _parse_kind(tok[0], tok[1], lineno)
        xs = _floats(tok[2:], lineno, "cell coordinates")
        if len(xs) != kind.nverts * n:
            raise ParseError(f"{kind} needs {kind.nverts * n} coordinates, got {len(xs)}", lineno)
        soup.append((kind, xs))
    return complex_from_soup(n, soup)


def parse_mesh(path, fmt: str = None) -> IndexedComplex:
    """Read a mesh file; ``fmt`` defaults to the file suffix."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt == "off":
        return _parse_off(path)
    if fmt == "indexed":
        return _parse_indexed(path)
    if fmt == "soup":
        return _parse_soup(path)
    raise FormatError(f"unknown mesh format {fmt!r}; expected one of {FORMATS}")


def _fmt_float(x: float) -> str:
    return repr(float(x))


def write_indexed(cx: IndexedComplex, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{cx.num_vertices} {cx.num_top_cells} {cx.ambient_dim}\n")
        for row in cx.coords.tolist():
            fh.write(" ".join(_fmt_float(x) for x in row) + "\n")
        for kind, cells in cx.cells.items():
            prefix = f"{kind.dim} {kind.shape} "
            for row in cells.tolist():
                fh.write(prefix + " ".join(map(str, row)) + "\n")


def write_off(cx: IndexedComplex, path) -> None:
    if cx.dims() != [2] or cx.ambient_dim > 3:
        raise FormatError("OFF output needs top 2-cells embedded in at most 3 dimensions")
    coords = np.zeros((cx.num_vertices, 3))
    coords[:, :cx.ambient_dim] = cx.coords
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"OFF\n{cx.num_vertices} {cx.num_top_cells} 0\n")
        for row in coords.tolist():
            fh.write(" ".join(_fmt_float(x) for x in row) + "\n")
        for kind, cells in cx.cells.items():
            for row in cells.tolist():
                fh.write(f"{len(row)} " + " ".join(map(str, row)) + "\n")


# ---------------------------------------------------------------------------
# .stellar
# ---------------------------------------------------------------------------

def _hierarchy_stream(tree) -> np.ndarray:
    out = []
    kinds = list(tree.complex.cells)
    stack = [tree.root]
    while stack:
        b = stack.pop()
        if not b.is_leaf:
            out.append(0)
            out.extend(0 if c is None else 1 for c in b.children)
            stack.extend(c for c in reversed(b.children) if c is not None)
            continue
        out.append(1)
        if tree.vertices_reindexed:
            out.extend((b.v_start, b.v_end))
        else:
            out.append(len(b.vertices))
            out.extend(int(v) for v in b.vertices)
        for kind in kinds:
            lst = b.tops.get(kind)
            entries = lst.as_array() if lst is not None else ()
            out.append(len(entries))
            out.extend(entries.tolist() if len(entries) else ())
    return np.asarray(out, dtype="<i8")


def write_stellar(tree, path) -> None:
    cx = tree.complex
    if cx.num_vertices == 0:
        raise EmptyComplexError("refusing to serialize an empty complex")
    hier = _hierarchy_stream(tree)
    prov = tree.provenance
    header = {
        "version": FORMAT_VERSION,
        "ambient_dim": cx.ambient_dim,
        "complex_dim": cx.complex_dim,
        "kv": "inf" if tree.kv == math.inf else int(tree.kv),
        "split_mode": tree.split_mode,
        "encoding": tree.encoding,
        "max_depth": tree.max_depth,
        "num_vertices": cx.num_vertices,
        "kinds": [{"shape": k.shape, "dim": k.dim, "count": int(a.shape[0])} for k, a in cx.cells.items()],
        "index_width": 4,
        "count_width": 8,
        "vertices_reindexed": tree.vertices_reindexed,
        "cells_inserted": tree.cells_inserted,
        "cells_reindexed": tree.cells_reindexed,
        "hierarchy_len": int(hier.size),
        "provenance": prov is not None,
    }
    hbytes = json.dumps(header, sort_keys=True).encode("ascii")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(hbytes)))
        fh.write(hbytes)
        fh.write(cx.coords.astype("<f8").tobytes())
        for a in cx.cells.values():
            fh.write(a.astype("<i4").tobytes())
        fh.write(hier.tobytes())
        if prov is not None:
            fh.write(np.asarray(prov["vertex"], dtype="<i8").tobytes())
            for kind in cx.cells:
                fh.write(np.asarray(prov[kind], dtype="<i8").tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, nbytes: int) -> bytes:
        if self.pos + nbytes > len(self.data):
            raise FormatError("truncated .stellar payload")
        out = self.data[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return out

    def array(self, dtype, count):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()


def read_stellar(path) -> StellarTree:
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise FormatError("not a .stellar file (bad magic)")
    version, hlen = struct.unpack("<II", r.take(8))
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported .stellar version {version}")
    try:
        header = json.loads(r.take(hlen).decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"corrupt header: {exc}") from None
    n, nv = header["ambient_dim"], header["num_vertices"]
    if nv == 0:
        raise EmptyComplexError("file holds an empty complex")
    if header.get("index_width", 4) != 4:
        raise FormatError("only 32-bit indices are supported")
    coords = r.array("<f8", nv * n).reshape(nv, n)
    kinds = [CellKind(k["shape"], k["dim"]) for k in header["kinds"]]
    cells = {}
    for kind, meta in zip(kinds, header["kinds"]):
        cells[kind] = r.array("<i4", meta["count"] * kind.nverts).reshape(-1, kind.nverts)
    cx = IndexedComplex(coords, cells)
    kv = math.inf if header["kv"] == "inf" else int(header["kv"])
    tree = StellarTree(cx, kv, header["split_mode"], coords.min(axis=0), coords.max(axis=0),
                       header["max_depth"])
    tree.encoding = header["encoding"]
    tree.vertices_reindexed = header["vertices_reindexed"]
    tree.cells_inserted = header["cells_inserted"]
    tree.cells_reindexed = header["cells_reindexed"]
    hier = r.array("<i8", header["hierarchy_len"])
    _rebuild_hierarchy(tree, hier, kinds)
    if header["provenance"]:
        prov = {"vertex": r.array("<i8", nv)}
        for kind in kinds:
            prov[kind] = r.array("<i8", cx.cells[kind].shape[0])
        tree.provenance = prov
    if r.pos != len(data):
        raise FormatError("trailing bytes after .stellar payload")
    return tree


def _rebuild_hierarchy(tree, hier: np.ndarray, kinds) -> None:
    vals = hier.tolist()
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(vals):
            raise FormatError("truncated hierarchy stream")
        pos += 1
        return vals[pos - 1]

    brood = tree.brood_size
    stack = [tree.root]
    while stack:
        b = stack.pop()
        flag = take()
        if flag == 0:
            present = [take() for _ in range(brood)]
            b.children = [Block(b, c, b.depth + 1) if p else None for c, p in enumerate(present)]
            stack.extend(c for c in reversed(b.children) if c is not None)
        elif flag == 1:
            if tree.vertices_reindexed:
                b.v_start, b.v_end = take(), take()
            else:
                cnt = take()
                b.vertices = np.array([take() for _ in range(cnt)], dtype=np.int64)
            b.tops = {}
            for kind in kinds:
                cnt = take()
                if cnt:
                    if pos + cnt > len(vals):
                        raise FormatError("truncated leaf list")
                    b.tops[kind] = SreList(np.array(vals[pos:pos + cnt], dtype=np.int64))
                    pos += cnt
        else:
            raise CorruptionError(f"bad block flag {flag} in hierarchy stream")
    if pos != len(vals):
        raise FormatError("unused entries at the end of the hierarchy stream")
    tree._leaves = None
    tree.leaves()
    if tree.vertices_reindexed:
        for blk in reversed(list(tree.blocks())):
            if not blk.is_leaf:
                kids = [c for c in blk.children if c is not None]
                blk.v_start, blk.v_end = kids[0].v_start, kids[-1].v_end
