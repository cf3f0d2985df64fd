"""Metapath-guided random walks over a single method graph.

A metapath is a list of edge kinds. A walk visits len(metapath) + 1
nodes, following one edge of the prescribed kind at each step. Walks
start from every node that has at least one outgoing edge of the first
kind; a dead end truncates the walk, and truncated walks are kept as
long as they cover at least two nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

DEFAULT_METAPATHS: tuple[tuple[str, ...], ...] = (
    ("definition", "receiver"),
    ("parameter", "inv_definition"),
    ("dep", "dep"),
    ("condition", "inv_dep"),
    ("receiver", "inv_receiver"),
)


class EmptyMetapathSet(Exception):
    """Raised when a walk sampler is configured with no metapaths."""


@dataclass
class MrwConfig:
    metapaths: tuple[tuple[str, ...], ...] = DEFAULT_METAPATHS
    walks_per_start: int = 2
    negatives: int = 5

    def __post_init__(self) -> None:
        if not self.metapaths:
            raise EmptyMetapathSet("at least one metapath is required")
        for mp in self.metapaths:
            if not mp:
                raise EmptyMetapathSet("metapaths must be non-empty")


@dataclass
class Walk:
    metapath_index: int
    nodes: list[int] = field(default_factory=list)


def typed_adjacency(g) -> dict[tuple[int, str], list[int]]:
    adj: dict[tuple[int, str], list[int]] = {}
    for e in g.edges:
        adj.setdefault((e.src, e.etype), []).append(e.dst)
    return adj


def sample_metapath_walks(g, config: MrwConfig, seed: int) -> list[Walk]:
    """Deterministic walk sample for one graph.

    For each metapath, every eligible start node yields
    config.walks_per_start walks. Successor choice at each step is
    uniform over the out-edges of the required kind.
    """
    adj = typed_adjacency(g)
    rng = np.random.default_rng(seed)
    walks: list[Walk] = []
    for mp_idx, metapath in enumerate(config.metapaths):
        starts = sorted(
            n.id for n in g.nodes if adj.get((n.id, metapath[0]))
        )
        for start in starts:
            for _ in range(config.walks_per_start):
                nodes = [start]
                for kind in metapath:
                    successors = adj.get((nodes[-1], kind))
                    if not successors:
                        break
                    nodes.append(successors[int(rng.integers(len(successors)))])
                if len(nodes) >= 2:
                    walks.append(Walk(mp_idx, nodes))
    return walks


def walk_pairs(walks: list[Walk]) -> list[tuple[int, int]]:
    """All unordered node pairs within each walk (co-walk positives)."""
    pairs: list[tuple[int, int]] = []
    for walk in walks:
        pairs.extend(itertools.combinations(walk.nodes, 2))
    return pairs
