"""Embedding export for external analysis and visualization.

Node-level lines: `<graph_id>\t<node_id>\t<feature>\t<v1> ... <vd>`.
Method-level lines average a graph's node rows:
`<graph_id>\t<v1> ... <vd>`. Fields are percent-encoded the same way
graph files are, so ids and features survive tabs and newlines.
"""

from __future__ import annotations

import numpy as np

from ..corpus import _encode_field
from ..embed import with_inverse_edges
from ..model import EncoderState, assemble_batch, encode_batch


def _format_vector(row: np.ndarray) -> str:
    return " ".join(f"{v:.8g}" for v in row)


def export_embeddings(
    graphs,
    encoder: EncoderState,
    node_path: str | None = None,
    method_path: str | None = None,
    batch_size: int = 32,
) -> tuple[int, int]:
    """Write node and/or method embedding files; returns line counts."""
    n_node_lines = 0
    n_method_lines = 0
    node_fh = open(node_path, "w", encoding="utf-8") if node_path else None
    method_fh = open(method_path, "w", encoding="utf-8") if method_path else None
    try:
        augmented = with_inverse_edges(list(graphs))
        for start in range(0, len(augmented), batch_size):
            chunk = augmented[start:start + batch_size]
            batch = assemble_batch(chunk, encoder)
            h = encode_batch(batch, encoder).data
            for gi, g in enumerate(chunk):
                lo, hi = batch.real_slices[gi]
                gid = _encode_field(g.method_id)
                if node_fh is not None:
                    for n in g.nodes:
                        row = h[lo + n.id]
                        node_fh.write(
                            f"{gid}\t{n.id}\t{_encode_field(n.feature)}"
                            f"\t{_format_vector(row)}\n"
                        )
                        n_node_lines += 1
                if method_fh is not None:
                    mean = h[lo:hi].mean(axis=0)
                    method_fh.write(f"{gid}\t{_format_vector(mean)}\n")
                    n_method_lines += 1
    finally:
        if node_fh is not None:
            node_fh.close()
        if method_fh is not None:
            method_fh.close()
    return n_node_lines, n_method_lines
