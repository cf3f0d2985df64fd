"""Command line pipeline: build, pretrain, finetune, eval, export.

build      parse every *.mj under a source tree into method graphs
pretrain   run the self-supervised objectives over a built corpus
finetune   train a name head or link scorer on top of an encoder
eval       recompute task metrics from saved checkpoints
export     write node and method embeddings as text

Every command takes --config (key = value file) plus repeatable
--set key=value overrides; results land under --out (default from
$SIGMACODE_OUT). Metrics are written both as sorted JSON and as
key = value text, so reruns with equal inputs produce equal bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    apply_setting,
    config_lines,
    load_config_file,
)
from .corpus import (
    Corpus,
    TooFewPackages,
    assemble_corpus,
    read_graph_file,
    read_manifest,
    read_split_file,
    split_corpus,
    write_graph_file,
    write_manifest,
    write_split_file,
)
from .embed import load_vector_file
from .frontend import LexError, ParseError, parse_source
from .graphbuild import SIGMA0, SIGMA0_EDGE_KINDS, build_sigma0, build_sigma1, validate_graph
from .model import encoder_from_tensors, encoder_to_tensors
from .nn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .pretrain import pretrain_run, pretrain_state_to_tensors, write_train_log
from .task import (
    NameVocab,
    build_eval_items,
    evaluate_name,
    export_embeddings,
    finetune_link,
    finetune_name,
    init_link_scorer,
    init_name_head,
    link_eval,
    method_name_from_id,
)

MANIFEST_NAME = "manifest.tsv"
SPLITS_NAME = "splits.tsv"
REPORT_NAME = "build_report.txt"


class CliError(Exception):
    """Fatal command failure with a user-facing message."""


# ------------------------------------------------------------- configuration


def _resolve_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = load_config_file(args.config, config)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        apply_setting(config, key.strip(), raw)
    for key in ("corpus_dir", "out_dir", "flavor", "seed"):
        value = getattr(args, key.replace("_dir", ""), None)
        if value is not None:
            setattr(config, key, value)
    config.validate()
    return config


def _write_config(config: RunConfig, out_dir: str) -> None:
    path = os.path.join(out_dir, "config.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(config_lines(config)) + "\n")


def _write_metrics(metrics: dict, out_dir: str, stem: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, stem + ".json"), "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, stem + ".txt"), "w", encoding="utf-8") as fh:
        for key in sorted(metrics):
            fh.write(f"{key} = {metrics[key]}\n")


# --------------------------------------------------------------------- build


def _package_name(root: str, path: str) -> str:
    rel = os.path.relpath(path, root)
    parent = os.path.dirname(rel)
    if parent in ("", "."):
        return os.path.splitext(os.path.basename(rel))[0]
    return parent.replace(os.sep, "/")


def _graph_file_name(pkg: str, taken: set[str]) -> str:
    base = pkg.replace("/", "__") or "root"
    name = base + ".sg"
    serial = 2
    while name in taken:
        name = f"{base}-{serial}.sg"
        serial += 1
    taken.add(name)
    return name


def cmd_build(args) -> int:
    config = _resolve_config(args)
    build = build_sigma0 if config.flavor == SIGMA0 else build_sigma1

    sources: list[str] = []
    for dirpath, dirnames, filenames in os.walk(config.corpus_dir):
        dirnames.sort()
        for fname in sorted(filenames):
            if fname.endswith(".mj"):
                sources.append(os.path.join(dirpath, fname))
    if not sources:
        raise CliError(f"no .mj files under {config.corpus_dir}")

    graphs = []
    packages: dict[str, list[str]] = {}
    name_counts: dict[tuple[str, str], int] = {}
    errors: list[str] = []
    report: list[str] = []
    for path in sources:
        pkg = _package_name(config.corpus_dir, path)
        try:
            with open(path, encoding="utf-8") as fh:
                methods = parse_source(fh.read())
        except (LexError, ParseError, UnicodeDecodeError, OSError) as exc:
            errors.append(f"{path}: {exc}")
            continue
        for ast in methods:
            ordinal = name_counts.get((pkg, ast.name), 0)
            name_counts[(pkg, ast.name)] = ordinal + 1
            method_id = f"{pkg}/{ast.name}@{ordinal}"
            g = build(ast, method_id)
            issues = validate_graph(g)
            if issues:
                errors.extend(f"{method_id}: {line}" for line in issues)
            graphs.append(g)
            packages.setdefault(pkg, []).append(method_id)
        report.append(f"{path}\t{pkg}\t{len(methods)} methods")

    if not graphs:
        for line in errors:
            print(f"error: {line}", file=sys.stderr)
        raise CliError("no methods could be parsed")

    corpus = assemble_corpus(graphs, packages)
    try:
        split_corpus(corpus, seed=config.seed)
    except TooFewPackages as exc:
        report.append(f"splits skipped: {exc}")

    out_dir = config.out_dir
    graph_dir = os.path.join(out_dir, "graphs")
    os.makedirs(graph_dir, exist_ok=True)
    by_pkg: dict[str, list] = {}
    for g in corpus.graphs:
        by_pkg.setdefault(corpus.package_of(g.method_id), []).append(g)
    taken: set[str] = set()
    entries = []
    for pkg in sorted(by_pkg):
        fname = _graph_file_name(pkg, taken)
        write_graph_file(os.path.join(graph_dir, fname), by_pkg[pkg])
        entries.append((pkg, os.path.join("graphs", fname)))
    write_manifest(os.path.join(out_dir, MANIFEST_NAME), entries)
    if corpus.splits:
        write_split_file(os.path.join(out_dir, SPLITS_NAME), corpus.splits)

    n_nodes = sum(len(g.nodes) for g in corpus.graphs)
    n_edges = sum(len(g.edges) for g in corpus.graphs)
    summary = (f"{len(corpus.graphs)} methods, {len(packages)} packages, "
               f"{n_nodes} nodes, {n_edges} edges, flavor {config.flavor}")
    report.append(summary)
    with open(os.path.join(out_dir, REPORT_NAME), "w", encoding="utf-8") as fh:
        for line in report:
            fh.write(line + "\n")
        for line in errors:
            fh.write(f"error\t{line}\n")
    _write_config(config, out_dir)

    print(summary)
    for line in errors:
        print(f"error: {line}", file=sys.stderr)
    return 1 if errors else 0


def load_corpus(built_dir: str) -> Corpus:
    """Reload a corpus written by the build command."""
    manifest_path = os.path.join(built_dir, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise CliError(f"no {MANIFEST_NAME} in {built_dir}; run build first")
    graphs = []
    packages: dict[str, list[str]] = {}
    for pkg, rel in read_manifest(manifest_path):
        chunk = read_graph_file(os.path.join(built_dir, rel))
        graphs.extend(chunk)
        packages.setdefault(pkg, []).extend(g.method_id for g in chunk)
    corpus = assemble_corpus(graphs, packages)
    splits_path = os.path.join(built_dir, SPLITS_NAME)
    if os.path.exists(splits_path):
        corpus.splits = read_split_file(splits_path)
    return corpus


# ------------------------------------------------------------------ pretrain


def _embed_table(config: RunConfig):
    if not config.vectors:
        return None
    return load_vector_file(config.vectors, dim=config.dims[0])


def cmd_pretrain(args) -> int:
    config = _resolve_config(args)
    corpus = load_corpus(config.corpus_dir)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)

    pre = config.pretrain_config(
        checkpoint_dir=os.path.join(out_dir, "checkpoints"),
        log_path=os.path.join(out_dir, "pretrain_log.tsv"),
    )
    pre.embed_table = _embed_table(config)
    result = pretrain_run(corpus, pre, config.seed)

    tensors, meta = pretrain_state_to_tensors(result.state)
    meta["seed"] = config.seed
    save_checkpoint(os.path.join(out_dir, "encoder.ckpt"), tensors, meta)
    _write_config(config, out_dir)
    final = result.records[-1].l_total if result.records else float("nan")
    trained = corpus.graphs_in_split("train") if corpus.splits else corpus.graphs
    print(f"pretrained {config.epochs} epochs on {len(trained)} graphs; "
          f"final loss {final:.6g}; encoder at {out_dir}/encoder.ckpt")
    return 0


def _load_encoder(path: str, config: RunConfig):
    try:
        tensors, meta = load_checkpoint(path)
    except (OSError, CheckpointError) as exc:
        raise CliError(f"cannot load encoder checkpoint {path}: {exc}") from exc
    table = None
    if meta.get("embedder", {}).get("mode") == "pretrained":
        table = _embed_table(config)
    return encoder_from_tensors(tensors, meta, table), tensors, meta


# ------------------------------------------------------------------ finetune


def cmd_finetune(args) -> int:
    config = _resolve_config(args)
    corpus = load_corpus(config.corpus_dir)
    encoder, _, enc_meta = _load_encoder(args.encoder, config)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)

    if args.task == "name":
        result = finetune_name(corpus, encoder, config.name_config(), config.seed)
        head = result.head
        tensors, meta = encoder_to_tensors(result.encoder)
        for name, t in head.named_params().items():
            tensors[name] = t.data
        meta.update({
            "task": "name",
            "pooling": head.pooling,
            "max_len": head.vocab.max_len,
            "subtokens": list(head.vocab.subtokens),
        })
        save_checkpoint(os.path.join(out_dir, "name_head.ckpt"), tensors, meta)
        metrics = dict(result.metrics)
        _write_metrics(metrics, out_dir, "metrics_name")
        with open(os.path.join(out_dir, "name_history.tsv"), "w", encoding="utf-8") as fh:
            keys = ["epoch", "loss", "train_f1", "valid_f1", "test_f1"]
            fh.write("\t".join(keys) + "\n")
            for rec in result.history:
                fh.write("\t".join(f"{rec[k]:.10g}" if k in rec else "" for k in keys) + "\n")
        print(f"name task: F1 {metrics.get('f1', float('nan')):.4f} "
              f"(epoch {int(metrics.get('selected_epoch', -1))})")
    else:
        result = finetune_link(corpus, encoder, config.link_config(), config.seed)
        tensors, meta = encoder_to_tensors(encoder)
        for name, t in result.scorer.named_params().items():
            tensors[name] = t.data
        meta.update({
            "task": "link",
            "scorer": result.scorer.kind,
            "mlp_hidden": config.mlp_hidden,
        })
        save_checkpoint(os.path.join(out_dir, "link_scorer.ckpt"), tensors, meta)
        metrics = result.metrics.as_dict()
        _write_metrics(metrics, out_dir, "metrics_link")
        print(f"link task ({result.scorer.kind}): MRR {metrics['mrr']:.4f}, "
              f"Hit@10 {metrics['hit10']:.4f}, p {metrics['p_value']:.3g}")
    _write_config(config, out_dir)
    return 0


# ---------------------------------------------------------------------- eval


def _load_head(path: str, config: RunConfig):
    try:
        tensors, meta = load_checkpoint(path)
    except (OSError, CheckpointError) as exc:
        raise CliError(f"cannot load head checkpoint {path}: {exc}") from exc
    table = None
    if meta.get("embedder", {}).get("mode") == "pretrained":
        table = _embed_table(config)
    encoder = encoder_from_tensors(tensors, meta, table)
    rng = np.random.default_rng(0)
    if meta.get("task") == "name":
        vocab = NameVocab(list(meta["subtokens"]), meta["max_len"])
        head = init_name_head(rng, encoder.d_out, vocab, meta["pooling"])
    elif meta.get("task") == "link":
        head = init_link_scorer(rng, meta["scorer"], encoder.d_out,
                                sorted(SIGMA0_EDGE_KINDS), meta["mlp_hidden"])
    else:
        raise CliError(f"{path} is not a task checkpoint (no task field)")
    for name, t in head.named_params().items():
        if name not in tensors:
            raise CliError(f"{path} lacks tensor {name!r}")
        t.data = tensors[name].copy()
    return encoder, head, meta


def _split_graphs(corpus: Corpus, split: str):
    graphs = corpus.graphs_in_split(split) if corpus.splits else list(corpus.graphs)
    if not graphs:
        raise CliError(f"split {split!r} holds no graphs")
    return graphs


def cmd_eval(args) -> int:
    config = _resolve_config(args)
    corpus = load_corpus(config.corpus_dir)
    encoder, head, meta = _load_head(args.head, config)
    graphs = _split_graphs(corpus, args.split)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)

    if meta["task"] == "name":
        names = {g.method_id: method_name_from_id(g.method_id) for g in graphs}
        scored = evaluate_name(graphs, names, encoder, head, config.batch_size)
        metrics = {"precision": scored[0], "recall": scored[1], "f1": scored[2],
                   "split": args.split, "n_methods": len(graphs)}
        _write_metrics(metrics, out_dir, f"eval_name_{args.split}")
        print(f"name {args.split}: P {scored[0]:.4f} R {scored[1]:.4f} F1 {scored[2]:.4f}")
    else:
        items = build_eval_items(graphs, encoder, config.test_fraction, config.seed)
        scored = link_eval(items, head, config.negatives_per_edge, config.seed)
        metrics = scored.as_dict()
        metrics["split"] = args.split
        _write_metrics(metrics, out_dir, f"eval_link_{args.split}")
        print(f"link {args.split}: MRR {metrics['mrr']:.4f}, Hit@1 {metrics['hit1']:.4f}, "
              f"Hit@10 {metrics['hit10']:.4f}")
    return 0


# -------------------------------------------------------------------- export


def cmd_export(args) -> int:
    config = _resolve_config(args)
    corpus = load_corpus(config.corpus_dir)
    encoder, _, _ = _load_encoder(args.encoder, config)
    graphs = _split_graphs(corpus, args.split) if args.split else list(corpus.graphs)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    node_path = os.path.join(out_dir, "node_embeddings.tsv")
    method_path = os.path.join(out_dir, "method_embeddings.tsv")
    n_nodes, n_methods = export_embeddings(
        graphs, encoder, node_path, method_path, config.batch_size
    )
    print(f"exported {n_nodes} node rows and {n_methods} method rows to {out_dir}")
    return 0


# ---------------------------------------------------------------- entry point


def _add_common(sub, corpus_help: str) -> None:
    sub.add_argument("--corpus", help=corpus_help)
    sub.add_argument("--out", help="output directory (default $SIGMACODE_OUT)")
    sub.add_argument("--config", help="key = value configuration file")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override one configuration key (repeatable)")
    sub.add_argument("--seed", type=int, help="run seed")
    sub.add_argument("--flavor", choices=["sigma0", "sigma1"],
                     help="graph flavor (build only affects new graphs)")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigmacode",
        description="Method graph construction and graph encoder training for MiniJ",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build", help="parse .mj sources into a graph corpus")
    _add_common(p, "directory tree of .mj source files")
    p.set_defaults(func=cmd_build)

    p = subs.add_parser("pretrain", help="self-supervised training on a built corpus")
    _add_common(p, "directory written by the build command")
    p.set_defaults(func=cmd_pretrain)

    p = subs.add_parser("finetune", help="train a task head on top of an encoder")
    _add_common(p, "directory written by the build command")
    p.add_argument("--task", choices=["name", "link"], required=True)
    p.add_argument("--encoder", required=True, help="encoder checkpoint path")
    p.set_defaults(func=cmd_finetune)

    p = subs.add_parser("eval", help="recompute task metrics from checkpoints")
    _add_common(p, "directory written by the build command")
    p.add_argument("--head", required=True, help="task checkpoint from finetune")
    p.add_argument("--split", default="test", choices=["train", "valid", "test"])
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("export", help="write node and method embeddings")
    _add_common(p, "directory written by the build command")
    p.add_argument("--encoder", required=True, help="encoder checkpoint path")
    p.add_argument("--split", choices=["train", "valid", "test"],
                   help="restrict to one split (default: all graphs)")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
