"""Per-node motif participation counts.

The graph is projected to a simple undirected graph (directions, edge
types, and multi-edges dropped). Connected induced subgraphs of sizes
3 and 4 are enumerated once each (ESU-style extension), classified by
degree sequence (a complete invariant at these sizes), and credited to
every member node. Targets are stored log-scaled: log(1 + count).
"""

from __future__ import annotations

import numpy as np

MOTIF_CLASSES = (
    "path3", "triangle",
    "path4", "star3", "cycle4", "tailed_triangle", "diamond", "clique4",
)

# (size, edge count, sorted degree sequence) -> class index
_CLASS_BY_SIGNATURE = {
    (3, 2, (1, 1, 2)): 0,
    (3, 3, (2, 2, 2)): 1,
    (4, 3, (1, 1, 2, 2)): 2,
    (4, 3, (1, 1, 1, 3)): 3,
    (4, 4, (2, 2, 2, 2)): 4,
    (4, 4, (1, 2, 2, 3)): 5,
    (4, 5, (2, 2, 3, 3)): 6,
    (4, 6, (3, 3, 3, 3)): 7,
}


def simple_adjacency(g) -> list[set[int]]:
    """Undirected neighbor sets; self-loops and duplicates collapse away."""
    adj: list[set[int]] = [set() for _ in g.nodes]
    for e in g.edges:
        if e.src != e.dst:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    return adj


def classify_subgraph(members: tuple[int, ...], adj: list[set[int]]) -> int:
    degrees = []
    edges = 0
    mset = set(members)
    for v in members:
        d = len(adj[v] & mset)
        degrees.append(d)
        edges += d
    edges //= 2
    signature = (len(members), edges, tuple(sorted(degrees)))
    idx = _CLASS_BY_SIGNATURE.get(signature)
    if idx is None:
        raise ValueError(f"subgraph {members} is not connected: {signature}")
    return idx


def _enumerate_size_k(adj: list[set[int]], k: int) -> list[tuple[int, ...]]:
    """Each connected induced k-subgraph exactly once (ESU)."""
    out: list[tuple[int, ...]] = []
    n = len(adj)

    def extend(sub: list[int], extension: set[int], root: int) -> None:
        if len(sub) == k:
            out.append(tuple(sorted(sub)))
            return
        ext = sorted(extension)
        remaining = set(extension)
        sub_neighbors = set().union(*(adj[s] for s in sub)) | set(sub)
        for w in ext:
            remaining.discard(w)
            excl = {u for u in adj[w] if u > root and u not in sub_neighbors}
            extend(sub + [w], remaining | excl, root)

    for v in range(n):
        extend([v], {u for u in adj[v] if u > v}, v)
    return out


def count_all_motifs(g) -> np.ndarray:
    """Raw per-node counts, shape (|V|, 8)."""
    adj = simple_adjacency(g)
    counts = np.zeros((len(adj), len(MOTIF_CLASSES)), dtype=np.int64)
    for k in (3, 4):
        if len(adj) < k:
            continue
        for members in _enumerate_size_k(adj, k):
            idx = classify_subgraph(members, adj)
            for v in members:
                counts[v, idx] += 1
    return counts


def count_motifs(g, node: int) -> np.ndarray:
    """Log-scaled motif vector for one node: log(1 + count)."""
    return np.log1p(count_all_motifs(g)[node].astype(np.float64))


def motif_targets(g) -> np.ndarray:
    """Log-scaled motif matrix for all nodes, shape (|V|, 8)."""
    return np.log1p(count_all_motifs(g).astype(np.float64))
