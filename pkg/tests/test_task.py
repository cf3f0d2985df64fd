import dataclasses
import filecmp

import numpy as np
import pytest

from sigmacode.embed import subtokenize_name, with_inverse_edges
from sigmacode.frontend import parse_method_text
from sigmacode.graphbuild import (
    SIGMA0_EDGE_KINDS,
    SigmaEdge,
    SigmaGraph,
    SigmaNode,
    build_sigma0,
    build_sigma1,
)
from sigmacode.model import assemble_batch, encode_batch
from sigmacode.task import (
    EvalItem,
    LinkFinetuneConfig,
    NameFinetuneConfig,
    NameVocab,
    NoTestEdges,
    PAD_ID,
    UNK_ID,
    VocabNotBuilt,
    build_eval_items,
    build_name_vocab,
    core_edges,
    decode_name,
    distmult_score,
    drop_edges,
    evaluate_name,
    export_embeddings,
    finetune_link,
    finetune_name,
    init_link_scorer,
    init_name_head,
    link_eval,
    method_name_from_id,
    micro_name_metrics,
    name_loss,
    name_logits,
    name_metrics,
    predict_name,
    sample_negative_dsts,
    score_logits,
    score_values,
    split_graph_edges,
    true_edge_set,
)
from sigmacode.task.pooling import (
    EmptyGraph,
    attention_weights,
    init_attention,
    pool_batch,
    pool_graph,
)
from sigmacode.nn.tensor import constant, parameter


# ------------------------------------------------------------------ pooling


def test_average_pooling_is_slice_mean(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:4])
    batch = assemble_batch(gs, unit_encoder)
    h = encode_batch(batch, unit_encoder)
    pooled = pool_batch(h, batch, "average")
    assert pooled.data.shape == (4, unit_encoder.d_out)
    for i, (lo, hi) in enumerate(batch.real_slices):
        assert np.allclose(pooled.data[i], h.data[lo:hi].mean(axis=0))


def test_virtual_pooling_reads_virtual_rows(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:3])
    batch = assemble_batch(gs, unit_encoder, virtual=True)
    h = encode_batch(batch, unit_encoder)
    pooled = pool_batch(h, batch, "virtual_node")
    for i in range(3):
        assert np.array_equal(pooled.data[i], h.data[batch.virtual_rows[i]])
    no_virtual = assemble_batch(gs, unit_encoder)
    with pytest.raises(ValueError):
        pool_batch(encode_batch(no_virtual, unit_encoder), no_virtual, "virtual_node")


def test_attention_pooling_weights(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:2])
    batch = assemble_batch(gs, unit_encoder)
    h = encode_batch(batch, unit_encoder)
    att = init_attention(np.random.default_rng(3), unit_encoder.d_out)
    pooled = pool_batch(h, batch, "attention", att)
    assert pooled.data.shape == (2, unit_encoder.d_out)
    for i, (lo, hi) in enumerate(batch.real_slices):
        rows = h.data[lo:hi]
        w = attention_weights(constant(rows), att).data
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.all(w > 0)
        assert np.allclose(pooled.data[i], (w * (rows @ att.proj.data)).sum(axis=0))
    with pytest.raises(ValueError):
        pool_batch(h, batch, "attention", None)
    with pytest.raises(ValueError):
        pool_batch(h, batch, "nope", att)


def test_attention_single_row_gets_weight_one():
    att = init_attention(np.random.default_rng(0), 4)
    rows = constant(np.array([[1.0, -2.0, 0.5, 3.0]]))
    assert np.allclose(attention_weights(rows, att).data, [[1.0]])


def test_empty_batch_and_empty_graph(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:2])
    batch = assemble_batch(gs, unit_encoder)
    h = encode_batch(batch, unit_encoder)
    with pytest.raises(EmptyGraph):
        pool_batch(h, dataclasses.replace(batch, graphs=[]), "average")
    hollow = dataclasses.replace(batch, real_slices=[(3, 3), batch.real_slices[1]])
    with pytest.raises(EmptyGraph):
        pool_graph(h, hollow, 0, "average")


# ------------------------------------------------------------------- naming


def test_method_name_from_id():
    assert method_name_from_id("util/strings/getName@0") == "getName"
    assert method_name_from_id("p/run@3") == "run"


def test_build_name_vocab_frequency_then_lexicographic():
    vocab = build_name_vocab(["getItem", "getCheck", "itemOf"], vocab_size=3)
    # get:2 item:2 check:1 of:1 -> frequency desc, ties alphabetical
    assert vocab.subtokens == ["get", "item", "check"]
    assert vocab.index == {"get": 2, "item": 3, "check": 4}
    assert vocab.n_classes == 5
    assert vocab.token_of(2) == "get"
    assert vocab.token_of(UNK_ID) == "<unk>"


def test_vocab_encode_truncates_pads_and_unks():
    vocab = NameVocab(["get", "item", "check"], max_len=4)
    assert vocab.encode("getItem") == [2, 3, PAD_ID, PAD_ID]
    assert vocab.encode("getFoo") == [2, UNK_ID, PAD_ID, PAD_ID]
    assert vocab.encode("getItemCheckGetItemGet") == [2, 3, 4, 2]
    assert vocab.encode("") == [PAD_ID] * 4


def test_decode_name_stops_at_pad_and_drops_unk():
    vocab = NameVocab(["get", "item"], max_len=3)
    hot = lambda i: np.eye(4)[i]
    assert decode_name([hot(2), hot(3), hot(0)], vocab) == ["get", "item"]
    assert decode_name([hot(2), hot(0), hot(3)], vocab) == ["get"]
    assert decode_name([hot(1), hot(3), hot(0)], vocab) == ["item"]
    assert decode_name([hot(0), hot(2), hot(2)], vocab) == []


def test_name_metrics_worked_example():
    p, r, f1 = name_metrics(["get", "name"], ["get", "name", "count"])
    assert p == 1.0 and abs(r - 2 / 3) < 1e-12 and abs(f1 - 0.8) < 1e-12
    # multiset overlap: a duplicated prediction matches only once
    p, r, f1 = name_metrics(["a", "a"], ["a"])
    assert p == 0.5 and r == 1.0
    assert name_metrics([], ["x"]) == (0.0, 0.0, 0.0)
    # unknown tokens are stripped before scoring
    assert name_metrics(["<unk>", "get"], ["get"]) == (1.0, 1.0, 1.0)


def test_micro_name_metrics_pools_counts():
    pairs = [(["get", "name"], ["get", "name", "count"]), (["x"], ["y"])]
    p, r, f1 = micro_name_metrics(pairs)
    assert abs(p - 2 / 3) < 1e-12
    assert abs(r - 2 / 4) < 1e-12
    assert abs(f1 - (2 * p * r / (p + r))) < 1e-12
    assert micro_name_metrics([]) == (0.0, 0.0, 0.0)


def test_name_loss_uniform_logits_value():
    vocab = NameVocab(["get", "item"], max_len=3)
    head = init_name_head(np.random.default_rng(0), 6, vocab, "average")
    for w in head.weights:
        w.data[:] = 0.0
    pooled = parameter(np.random.default_rng(1).normal(size=(2, 6)))
    logits = name_logits(pooled, head)
    targets = np.array([[2, 3, 0], [3, 0, 0]])
    loss = name_loss(logits, targets)
    # zero weights give uniform rows: each position costs log(n_classes)
    assert abs(float(loss.data) - 2 * 3 * np.log(vocab.n_classes)) < 1e-10
    # and the argmax everywhere is PAD, so decoding yields empty names
    assert predict_name(pooled, head) == [[], []]


def test_predict_name_requires_vocab():
    vocab = NameVocab([], max_len=2)
    head = init_name_head(np.random.default_rng(0), 4, vocab, "average")
    with pytest.raises(VocabNotBuilt):
        predict_name(constant(np.zeros((1, 4))), head)


def test_finetune_name_selects_best_epoch(unit_corpus, unit_encoder):
    corpus, names = unit_corpus
    import copy

    encoder = copy.deepcopy(unit_encoder)
    cfg = NameFinetuneConfig(pooling="average", epochs=6, batch_size=16,
                             lr=3e-3, vocab_size=50, max_len=5)
    res = finetune_name(corpus, encoder, cfg, seed=2, names=names)
    assert len(res.history) == 6
    assert set(res.metrics) >= {"precision", "recall", "f1", "train_f1",
                                "valid_f1", "selected_epoch"}
    sel = int(res.metrics["selected_epoch"])
    assert res.metrics["valid_f1"] == max(h["valid_f1"] for h in res.history)
    assert res.history[sel]["valid_f1"] == res.metrics["valid_f1"]
    # returned parameters are the selected epoch's: re-evaluating the
    # returned head and encoder reproduces the recorded split metrics
    valid = corpus.graphs_in_split("valid")
    test = corpus.graphs_in_split("test")
    assert evaluate_name(valid, names, res.encoder, res.head)[2] == \
        pytest.approx(res.metrics["valid_f1"], abs=1e-12)
    assert evaluate_name(test, names, res.encoder, res.head)[2] == \
        pytest.approx(res.metrics["f1"], abs=1e-12)


def test_finetune_name_deterministic(unit_corpus):
    corpus, names = unit_corpus
    from tests.conftest import small_encoder

    cfg = NameFinetuneConfig(pooling="attention", epochs=3, batch_size=16,
                             lr=1e-3, vocab_size=50)
    r1 = finetune_name(corpus, small_encoder(corpus), cfg, seed=4, names=names)
    r2 = finetune_name(corpus, small_encoder(corpus), cfg, seed=4, names=names)
    assert r1.metrics == r2.metrics
    assert r1.history == r2.history


# ---------------------------------------------------------------- link pred


def test_distmult_score_hand_value():
    got = distmult_score(np.array([1.0, 2.0, -1.0]),
                         np.array([0.5, 1.0, 2.0]),
                         np.array([3.0, -1.0, 1.0]))
    assert got == pytest.approx(1.5 - 2.0 - 2.0)


def test_init_link_scorer_shapes():
    rng = np.random.default_rng(0)
    kinds = sorted(SIGMA0_EDGE_KINDS)
    dm = init_link_scorer(rng, "distmult", 8, kinds)
    assert sorted(dm.rel) == kinds
    assert all(v.data.shape == (8,) for v in dm.rel.values())
    assert sorted(dm.named_params()) == [f"link/rel/{k}" for k in kinds]
    mlp = init_link_scorer(rng, "mlp", 8, kinds, hidden=12)
    assert mlp.mlp.w1.data.shape == (16, 12)
    assert mlp.mlp.w2.data.shape == (12, 1)
    with pytest.raises(ValueError):
        init_link_scorer(rng, "bilinear", 8, kinds)


def test_score_logits_matches_elementwise_distmult():
    rng = np.random.default_rng(1)
    kinds = sorted(SIGMA0_EDGE_KINDS)
    scorer = init_link_scorer(rng, "distmult", 6, kinds)
    h = rng.normal(size=(9, 6))
    src = [0, 3, 1, 7, 2, 5]
    dst = [1, 2, 8, 0, 4, 6]
    ets = ["dep", "condition", "dep", "throw", "condition", "dep"]
    z = score_logits(scorer, constant(h), src, dst, ets).data
    for i in range(len(src)):
        want = distmult_score(h[src[i]], scorer.rel[ets[i]].data, h[dst[i]])
        assert z[i] == pytest.approx(want, rel=1e-12)
    # the no-tape evaluation path agrees kind by kind
    for k in ("dep", "condition"):
        rows = [i for i, e in enumerate(ets) if e == k]
        vals = score_values(scorer, h, np.asarray(src)[rows], np.asarray(dst)[rows], k)
        assert np.allclose(vals, z[rows])


def test_mlp_score_values_are_sigmoid_of_logits():
    rng = np.random.default_rng(2)
    scorer = init_link_scorer(rng, "mlp", 5, ["dep"], hidden=7)
    h = rng.normal(size=(6, 5))
    src, dst = [0, 2, 4], [1, 3, 5]
    z = score_logits(scorer, constant(h), src, dst, ["dep"] * 3).data
    v = score_values(scorer, h, np.asarray(src), np.asarray(dst), "dep")
    assert np.allclose(v, 1.0 / (1.0 + np.exp(-z)))


def test_sample_negative_dsts_avoids_true_edges():
    true = {(0, "dep", 1), (0, "dep", 2)}
    rng = np.random.default_rng(0)
    negs = sample_negative_dsts(0, "dep", true, 6, 500, rng)
    assert len(negs) == 500
    assert not {(0, "dep", int(w)) for w in negs} & true
    assert set(int(w) for w in negs) <= {0, 3, 4, 5}


def _item(h, edges, n_nodes):
    return EvalItem(h=h, test_edges=edges,
                    true_edges={(e.src, e.etype, e.dst) for e in edges},
                    n_nodes=n_nodes)


def test_link_eval_rank_conventions():
    kinds = sorted(SIGMA0_EDGE_KINDS)
    scorer = init_link_scorer(np.random.default_rng(0), "distmult", 3, kinds)
    for k in kinds:
        scorer.rel[k].data[:] = 1.0

    # all-zero embeddings tie everywhere: rank = 1 + 200/2 = 101
    ties = _item(np.zeros((5, 3)), [SigmaEdge(0, "dep", 1)], 5)
    m = link_eval([ties], scorer, negatives_per_edge=200, seed=0)
    assert m.mrr == pytest.approx(1.0 / 101.0)
    assert m.hit1 == 0.0 and m.hit10 == 0.0
    assert m.n_test == 1

    # the true destination is the only candidate row aligned with the
    # source; the self-row is masked out through the true-edge set
    h = np.zeros((5, 3))
    h[0, 0] = 1.0
    h[1, 0] = 1.0
    top = EvalItem(h=h, test_edges=[SigmaEdge(0, "dep", 1)],
                   true_edges={(0, "dep", 1), (0, "dep", 0)}, n_nodes=5)
    m = link_eval([top], scorer, negatives_per_edge=200, seed=0)
    assert m.mrr == 1.0 and m.hit1 == 1.0 and m.hit3 == 1.0 and m.hit10 == 1.0
    assert m.pos_mean == pytest.approx(1.0)
    assert m.neg_mean == pytest.approx(0.0)
    # one positive sample leaves the Welch test undefined
    assert np.isnan(m.p_value)

    with pytest.raises(NoTestEdges):
        link_eval([], scorer)


def test_link_eval_invariant_under_positive_scaling():
    kinds = sorted(SIGMA0_EDGE_KINDS)
    rng = np.random.default_rng(3)
    scorer = init_link_scorer(rng, "distmult", 4, kinds)
    h = rng.normal(size=(8, 4))
    edges = [SigmaEdge(0, "dep", 1), SigmaEdge(2, "condition", 5)]
    item = _item(h, edges, 8)
    base = link_eval([item], scorer, seed=1)
    for k in kinds:
        scorer.rel[k].data *= 7.5
    scaled = link_eval([item], scorer, seed=1)
    assert base.mrr == scaled.mrr
    assert (base.hit1, base.hit3, base.hit10) == (scaled.hit1, scaled.hit3, scaled.hit10)


SPLIT_TEXT = """int tally(List xs) {
    int total = 0;
    int i = 0;
    while (i < xs.size()) {
        int v = xs.get(i);
        total = total + v;
        i = i + 1;
    }
    return total;
}"""


def test_split_graph_edges_pairs_flavors():
    m = parse_method_text(SPLIT_TEXT)
    g0 = build_sigma0(m, "p/tally@0")
    g1 = build_sigma1(m, "p/tally@0")
    tr0, te0 = split_graph_edges(g0, 0.1, seed=9)
    tr1, te1 = split_graph_edges(g1, 0.1, seed=9)
    key = lambda es: [(e.src, e.etype, e.dst) for e in es]
    assert key(te0) == key(te1)
    n = len(core_edges(g0))
    assert len(te0) == max(1, int(np.floor(0.1 * n)))
    assert len(tr0) + len(te0) == n
    assert all(e.etype in SIGMA0_EDGE_KINDS for e in te0)
    # a different seed moves the held-out set eventually
    assert any(key(split_graph_edges(g0, 0.1, seed=s)[1]) != key(te0)
               for s in range(10, 20))


def test_split_tiny_graph_keeps_everything():
    g = SigmaGraph("t", "sigma0",
                   [SigmaNode(0, "entry", "ENTRY"), SigmaNode(1, "exit", "EXIT")],
                   [SigmaEdge(0, "dep", 1)])
    train, test = split_graph_edges(g, 0.5, seed=0)
    assert len(train) == 1 and test == []


def test_drop_edges_multiset():
    nodes = [SigmaNode(i, "data", "int") for i in range(3)]
    edges = [SigmaEdge(0, "dep", 1), SigmaEdge(0, "dep", 1), SigmaEdge(1, "dep", 2)]
    g = SigmaGraph("t", "sigma0", nodes, edges)
    out = drop_edges(g, [SigmaEdge(0, "dep", 1)])
    assert len(out.edges) == 2
    assert (0, "dep", 1) in true_edge_set(out)  # one of the two copies survives
    assert g.edges == edges  # original untouched


def test_build_eval_items(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = corpus.graphs_in_split("test")
    items = build_eval_items(gs, unit_encoder, 0.1, seed=0)
    assert items
    by_id = {g.method_id: g for g in gs}
    matched = 0
    for item in items:
        assert item.h.shape[1] == unit_encoder.d_out
        assert item.test_edges
        for e in item.test_edges:
            assert (e.src, e.etype, e.dst) in item.true_edges
        for g in by_id.values():
            if len(g.nodes) == item.n_nodes and \
                    item.true_edges == true_edge_set(g):
                matched += 1
                break
    assert matched == len(items)


def test_finetune_link_runs_and_is_deterministic(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    cfg = LinkFinetuneConfig(scorer="mlp", epochs=2, batch_size=8, lr=1e-3,
                             train_negatives=2, negatives_per_edge=50,
                             mlp_hidden=8)
    r1 = finetune_link(corpus, unit_encoder, cfg, seed=1)
    r2 = finetune_link(corpus, unit_encoder, cfg, seed=1)
    assert r1.metrics.as_dict() == r2.metrics.as_dict()
    m = r1.metrics
    assert 0.0 < m.mrr <= 1.0
    assert 0.0 <= m.hit1 <= m.hit3 <= m.hit10 <= 1.0
    assert 0.0 <= m.p_value <= 1.0
    assert m.n_test > 0


# ------------------------------------------------------------------- export


def test_export_embeddings(unit_corpus, unit_encoder, tmp_path):
    corpus, _ = unit_corpus
    gs = corpus.graphs[:5]
    node_path = tmp_path / "nodes.tsv"
    method_path = tmp_path / "methods.tsv"
    n_nodes, n_methods = export_embeddings(gs, unit_encoder,
                                           str(node_path), str(method_path))
    assert n_nodes == sum(len(g.nodes) for g in gs)
    assert n_methods == 5

    node_lines = node_path.read_text().strip().split("\n")
    assert len(node_lines) == n_nodes
    first = node_lines[0].split("\t")
    assert len(first) == 4
    assert first[0] == gs[0].method_id
    assert first[1] == "0"
    assert first[2] == gs[0].nodes[0].feature
    assert len(first[3].split(" ")) == unit_encoder.d_out

    method_lines = method_path.read_text().strip().split("\n")
    assert len(method_lines) == 5
    gid, vec = method_lines[0].split("\t")
    assert gid == gs[0].method_id
    assert len(vec.split(" ")) == unit_encoder.d_out

    export_embeddings(gs, unit_encoder, str(tmp_path / "n2.tsv"),
                      str(tmp_path / "m2.tsv"))
    assert filecmp.cmp(node_path, tmp_path / "n2.tsv", shallow=False)
    assert filecmp.cmp(method_path, tmp_path / "m2.tsv", shallow=False)
