"""Poke at the embedding file format byte by byte, then round-trip a full
benchmark directory through the loaders."""

import struct
import tempfile
from pathlib import Path

import numpy as np

from zeroshift.io import (
    load_benchmark,
    load_embeddings,
    save_benchmark,
    save_embeddings,
)
from zeroshift.synth import synth_generate

tmp = Path(tempfile.mkdtemp())

# two rows, three columns; values picked so the bytes are easy to eyeball
m = np.array([[1.0, 0.5, -2.0], [0.0, 3.25, 1.0]])
path = tmp / "tiny.emb"
save_embeddings(path, m)

raw = path.read_bytes()
print("file size:", len(raw), "bytes  (12 header + 6 floats * 4)")
print("magic:", raw[:4])
rows, dim = struct.unpack("<II", raw[4:12])
print("rows =", rows, " dim =", dim)
print("first float:", struct.unpack("<f", raw[12:16])[0])

back = load_embeddings(path)
print("round trip dtype:", back.dtype, " equal:", np.array_equal(back, m))

# a whole benchmark is just these files plus small text sidecars
bundle, graph, synonyms = synth_generate(
    c_seen=3, c_unseen=2, dim=8, per_class=4, seed=1
)
bench = tmp / "bench"
save_benchmark(bench, bundle, graph, synonyms)
for f in sorted(p.name for p in bench.iterdir()):
    print(" ", f)

bundle2, graph2, synonyms2 = load_benchmark(bench)
print("labels preserved:",
      np.array_equal(bundle.source_labels, bundle2.source_labels))
print("features survive the 32-bit round trip:",
      np.allclose(bundle.source_features, bundle2.source_features, atol=1e-6))
