# coding: utf-8

# # Synthetic complexes, files and the command line

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from stellar import (gen_sierpinski, gen_vrips, parse_mesh, read_stellar, run_pipeline,
                     tree_stats, write_indexed, write_stellar)

# Random refinement of a simplex: every round splits each simplex into 2^k
# children and keeps each child with the given probability.

sp = gen_sierpinski(3, 3, keep_fraction=0.65, seed=4)
print(sp.num_vertices, "vertices,", sp.num_top_cells, "tetrahedra")

# Vietoris-Rips complex of a point cloud: one simplex per maximal clique of
# the epsilon-neighborhood graph.

pts = np.random.default_rng(0).random((200, 3))
vr = gen_vrips(pts, 0.18)
print({str(k): len(a) for k, a in vr.cells.items()})

# Mixed complexes survive the text round trip and the tree survives the
# binary one.

tmp = Path(tempfile.mkdtemp())
write_indexed(vr, tmp / "vr.indexed")
tree = run_pipeline(parse_mesh(tmp / "vr.indexed"), kv=32)
write_stellar(tree, tmp / "vr.stellar")
print(tree_stats(tree).to_json() == tree_stats(read_stellar(tmp / "vr.stellar")).to_json())

# The same steps from the shell.

def stellar(*args):
    out = subprocess.run([sys.executable, "-m", "stellar", *args], capture_output=True, text=True)
    return out.stdout


print(stellar("synth", "grid", "tri2d", "40", "40", "--output", str(tmp / "g.off")))
print(stellar("build", "--input", str(tmp / "g.off"), "--kv", "50", "--output", str(tmp / "g.stellar")))
print(json.loads(stellar("stats", "--input", str(tmp / "g.stellar")))["mu"])
print(stellar("gen-halfedge", "--input", str(tmp / "g.stellar")).splitlines()[:3])
