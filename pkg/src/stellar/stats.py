"""Spanning and reference numbers, storage costs and report rows.

Costs are counted in references (the abstract unit of the storage
formulas); :func:`cost_bytes` converts them at a chosen reference width.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .complex import indexed_storage_cost

__all__ = [
    "TreeStats",
    "spanning_numbers",
    "reference_number",
    "tree_storage_cost",
    "tree_stats",
    "cost_bytes",
    "timings_row",
    "TIMING_COLUMNS",
]

HIERARCHY_REFS_PER_BLOCK = 7
TIMING_COLUMNS = ("insert-verts", "reindex-verts", "insert-cells", "reindex-cells", "total")


def _kv_label(kv):
    return "inf" if kv == math.inf else int(kv)


def spanning_numbers(tree):
    """Per-cell spanning numbers and their average, computed two ways.

    Returns ``(chi_per_cell, chi, chi_by_leaves)``.  ``chi_per_cell`` is
    ordered by kind, then cell position.  ``chi`` averages the per-cell
    counts; ``chi_by_leaves`` divides the summed leaf-list sizes by |ΣT|.
    Both use integer sums, so they agree exactly.
    """
    cx = tree.complex
    per_kind = {kind: np.zeros(a.shape[0], dtype=np.int64) for kind, a in cx.cells.items()}
    leaf_total = 0
    for leaf in tree.leaves():
        for kind, lst in leaf.tops.items():
            ids = lst.decode()
            np.add.at(per_kind[kind], ids, 1)
            leaf_total += lst.size()
    chi_cell = np.concatenate(list(per_kind.values())) if per_kind else np.zeros(0, np.int64)
    n = len(chi_cell)
    if n == 0:
        return chi_cell, 0.0, 0.0
    return chi_cell, int(chi_cell.sum()) / n, leaf_total / n


def reference_number(tree) -> float:
    """Stored leaf-list entries per top cell (μ)."""
    n = tree.complex.num_top_cells
    if n == 0:
        return 0.0
    return _stored_entries(tree) / n


def _stored_entries(tree) -> int:
    return sum(lst.num_entries for leaf in tree.leaves() for lst in leaf.tops.values())


def tree_storage_cost(tree) -> dict:
    """Reference counts per component of the tree (indexed mesh reported separately).

    ``hierarchy`` is 7|h| over materialized blocks.  ``vertex_lists`` is
    |ΣV| for the explicit encoding; with reindexed vertices each leaf keeps
    a ``[v_start, v_end)`` pair folded into its hierarchy slots, costing
    nothing extra.  ``cell_lists`` counts stored entries, which equals
    χ|ΣT| when lists are not compressed.
    """
    blocks = tree.num_blocks
    hierarchy = HIERARCHY_REFS_PER_BLOCK * blocks
    vertex_lists = 0 if tree.vertices_reindexed else tree.complex.num_vertices
    cell_lists = _stored_entries(tree)
    total = hierarchy + vertex_lists + cell_lists
    return {
        "hierarchy": hierarchy,
        "vertex_lists": vertex_lists,
        "cell_lists": cell_lists,
        "total": total,
        "indexed_base": indexed_storage_cost(tree.complex),
    }


def cost_bytes(costs: dict, width: int = 4) -> dict:
    return {k: v * width for k, v in costs.items()}


@dataclass
class TreeStats:
    num_vertices: int
    num_top_cells: int
    ambient_dim: int
    complex_dim: int
    kv: object
    split_mode: str
    encoding: str
    blocks: int
    leaves: int
    internal: int
    chi: float
    chi_by_leaves: float
    mu: float
    max_leaf_vertices: int
    max_leaf_tops: int
    costs: dict = field(default_factory=dict)
    top_cells_per_kind: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        """One header and one data row; the leading columns use table symbols."""
        row = {"|ΣV|": self.num_vertices, "|ΣT|": self.num_top_cells, "kv": self.kv,
               "|h|": self.blocks, "|hL|": self.leaves, "χ": self.chi, "μ": self.mu}
        row.update({f"cost_{k}": v for k, v in self.costs.items()})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        w.writeheader()
        w.writerow(row)
        return buf.getvalue()


def tree_stats(tree) -> TreeStats:
    cx = tree.complex
    _, chi, chi_leaves = spanning_numbers(tree)
    leaves = tree.leaves()
    blocks = tree.num_blocks
    return TreeStats(
        num_vertices=cx.num_vertices,
        num_top_cells=cx.num_top_cells,
        ambient_dim=cx.ambient_dim,
        complex_dim=cx.complex_dim,
        kv=_kv_label(tree.kv),
        split_mode=tree.split_mode,
        encoding=tree.encoding,
        blocks=blocks,
        leaves=len(leaves),
        internal=blocks - len(leaves),
        chi=chi,
        chi_by_leaves=chi_leaves,
        mu=reference_number(tree),
        max_leaf_vertices=max((leaf.num_vertices for leaf in leaves), default=0),
        max_leaf_tops=max((sum(l.size() for l in leaf.tops.values()) for leaf in leaves), default=0),
        costs=tree_storage_cost(tree),
        top_cells_per_kind={str(kind): int(a.shape[0]) for kind, a in cx.cells.items()},
    )


def timings_row(tree) -> dict:
    """Per-phase wall times (seconds) under the report column names."""
    t = tree.timings or {}
    keys = ("insert_verts", "reindex_verts", "insert_cells", "reindex_cells", "total")
    return {col: float(t.get(key, 0.0)) for col, key in zip(TIMING_COLUMNS, keys)}
