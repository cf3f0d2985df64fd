"""Corpus assembly, node tying classification, splits, serialization.

A corpus is a bag of method graphs grouped by package. Tying rules:
features that are MiniJ keywords, operator lexemes, ENTRY, or EXIT are
strictly tied (one shared learnable embedding row corpus-wide); other
features that occur more than once form weak groups; unique features
stay untied.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .frontend.lexer import KEYWORDS, OPERATORS
from .graphbuild import SIGMA0, SIGMA1, SigmaEdge, SigmaGraph, SigmaNode

STRICT_FEATURES = frozenset(KEYWORDS) | frozenset(OPERATORS) | {"ENTRY", "EXIT"}

STRICT = "strict"
WEAK = "weak"
UNTIED = "untied"


class DuplicateGraphId(Exception):
    pass


class TooFewPackages(Exception):
    pass


class FormatError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def is_strict_feature(feature: str) -> bool:
    return feature in STRICT_FEATURES


def classify_tying(feature: str, ntype: str, occurrences: int = 1) -> str:
    """Tying class of a feature given its corpus-wide occurrence count.

    ntype is part of the call contract (features are only meaningful for
    a node type) but the rule itself is purely feature-driven.
    """
    del ntype
    if is_strict_feature(feature):
        return STRICT
    return WEAK if occurrences >= 2 else UNTIED


@dataclass
class TyingIndex:
    strict_vocab: dict[str, int] = field(default_factory=dict)
    weak_groups: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    feature_counts: dict[str, int] = field(default_factory=dict)

    def classify(self, feature: str, ntype: str = "") -> str:
        return classify_tying(feature, ntype, self.feature_counts.get(feature, 1))

    def strict_row(self, feature: str) -> int | None:
        return self.strict_vocab.get(feature)


@dataclass
class Corpus:
    graphs: list[SigmaGraph]
    packages: dict[str, list[str]]          # package -> method ids
    tying: TyingIndex
    splits: dict[str, str] = field(default_factory=dict)  # package -> split

    def graph_by_id(self, method_id: str) -> SigmaGraph:
        return self._index[method_id]

    def __post_init__(self) -> None:
        self._index = {g.method_id: g for g in self.graphs}

    def package_of(self, method_id: str) -> str:
        for pkg, ids in self.packages.items():
            if method_id in ids:
                return pkg
        raise KeyError(method_id)

    def graphs_in_split(self, split: str) -> list[SigmaGraph]:
        ids: list[str] = []
        for pkg, tag in self.splits.items():
            if tag == split:
                ids.extend(self.packages[pkg])
        return [self._index[i] for i in ids]


def assemble_corpus(graphs: list[SigmaGraph], packages: dict[str, list[str]]) -> Corpus:
    seen: set[str] = set()
    for g in graphs:
        if g.method_id in seen:
            raise DuplicateGraphId(g.method_id)
        seen.add(g.method_id)

    counts: dict[str, int] = {}
    for g in graphs:
        for n in g.nodes:
            counts[n.feature] = counts.get(n.feature, 0) + 1

    strict_vocab = {f: i for i, f in enumerate(
        sorted(f for f in counts if is_strict_feature(f)))}

    weak_groups: dict[str, list[tuple[str, int]]] = {}
    for g in graphs:
        for n in g.nodes:
            if not is_strict_feature(n.feature) and counts[n.feature] >= 2:
                weak_groups.setdefault(n.feature, []).append((g.method_id, n.id))

    tying = TyingIndex(strict_vocab, weak_groups, counts)
    return Corpus(graphs, packages, tying)


def split_corpus(corpus: Corpus, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
                 seed: int = 0) -> dict[str, str]:
    """Package-level split; floor rounding with every split non-empty."""
    names = sorted(corpus.packages)
    if len(names) < 3:
        raise TooFewPackages(f"{len(names)} package(s); need at least 3")
    rng = random.Random(seed)
    rng.shuffle(names)
    n = len(names)
    n_valid = max(1, int(n * ratios[1]))
    n_test = max(1, int(n * ratios[2]))
    n_train = n - n_valid - n_test
    splits: dict[str, str] = {}
    for name in names[:n_train]:
        splits[name] = "train"
    for name in names[n_train:n_train + n_valid]:
        splits[name] = "valid"
    for name in names[n_train + n_valid:]:
        splits[name] = "test"
    corpus.splits = splits
    return splits


# -------------------------------------------------------------- serialization

_ENC = [("%", "%25"), ("\t", "%09"), ("\n", "%0A"), ("\r", "%0D")]


def _encode_field(text: str) -> str:
    for raw, enc in _ENC:
        text = text.replace(raw, enc)
    return text


def _decode_field(text: str) -> str:
    for raw, enc in reversed(_ENC):
        text = text.replace(enc, raw)
    return text


def serialize_graph(g: SigmaGraph) -> bytes:
    lines = [f"SIGMA\t{g.flavor}\t{_encode_field(g.method_id)}"]
    for n in g.nodes:
        line = f"N\t{n.id}\t{n.ntype}\t{_encode_field(n.feature)}"
        if g.flavor == SIGMA1:
            line += f"\t{n.ast_kind}"
        lines.append(line)
    for e in g.edges:
        lines.append(f"E\t{e.src}\t{e.etype}\t{e.dst}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_graph(data: bytes) -> SigmaGraph:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("not valid UTF-8", exc.start) from exc
    offset = 0
    nodes: list[SigmaNode] = []
    edges: list[SigmaEdge] = []
    flavor = ""
    method_id = ""
    saw_header = False
    for line in text.split("\n"):
        if line == "":
            offset += 1
            continue
        fields = line.split("\t")
        tag = fields[0]
        if tag == "SIGMA":
            if saw_header:
                raise FormatError("duplicate header", offset)
            if len(fields) != 3:
                raise FormatError("malformed header", offset)
            flavor = fields[1]
            if flavor not in (SIGMA0, SIGMA1):
                raise FormatError(f"unknown flavor {flavor!r}", offset)
            method_id = _decode_field(fields[2])
            saw_header = True
        elif tag == "N":
            if not saw_header:
                raise FormatError("node line before header", offset)
            want = 5 if flavor == SIGMA1 else 4
            if len(fields) != want:
                raise FormatError(f"node line needs {want} fields", offset)
            ast_kind = fields[4] if flavor == SIGMA1 else None
            try:
                nid = int(fields[1])
            except ValueError:
                raise FormatError("node id not an integer", offset) from None
            nodes.append(SigmaNode(nid, fields[2], _decode_field(fields[3]), ast_kind))
        elif tag == "E":
            if not saw_header:
                raise FormatError("edge line before header", offset)
            if len(fields) != 4:
                raise FormatError("edge line needs 4 fields", offset)
            try:
                edges.append(SigmaEdge(int(fields[1]), fields[2], int(fields[3])))
            except ValueError:
                raise FormatError("edge endpoint not an integer", offset) from None
        else:
            raise FormatError(f"unknown line tag {tag!r}", offset)
        offset += len(line.encode("utf-8")) + 1
    if not saw_header:
        raise FormatError("missing header", 0)
    ids = {n.id for n in nodes}
    for e in edges:
        if e.src not in ids or e.dst not in ids:
            raise FormatError(f"edge references missing node {e.src}->{e.dst}", offset)
    return SigmaGraph(method_id, flavor, nodes, edges)


def write_graph_file(path, graphs: list[SigmaGraph]) -> None:
    """Concatenated graph records; each starts with its own SIGMA header."""
    with open(path, "wb") as fh:
        for g in graphs:
            fh.write(serialize_graph(g))


def read_graph_file(path) -> list[SigmaGraph]:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    chunks: list[list[str]] = []
    for line in text.split("\n"):
        if line.startswith("SIGMA\t"):
            chunks.append([line])
        elif line.strip():
            if not chunks:
                raise FormatError("content before first header", 0)
            chunks[-1].append(line)
    return [deserialize_graph(("\n".join(c) + "\n").encode("utf-8")) for c in chunks]


def write_manifest(path, entries: list[tuple[str, str]]) -> None:
    """entries: (package, graph file path) pairs."""
    with open(path, "w", encoding="utf-8") as fh:
        for pkg, gpath in entries:
            fh.write(f"{pkg}\t{gpath}\n")


def read_manifest(path) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"manifest line {i} needs 2 fields", 0)
            out.append((parts[0], parts[1]))
    return out


def write_split_file(path, splits: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pkg in sorted(splits):
            fh.write(f"{pkg}\t{splits[pkg]}\n")


def read_split_file(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in ("train", "valid", "test"):
                raise FormatError(f"split line {i} malformed", 0)
            out[parts[0]] = parts[1]
    return out
