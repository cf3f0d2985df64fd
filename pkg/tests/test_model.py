import numpy as np

from sigmacode.embed import SubwordEmbedder, with_inverse_edges
from sigmacode.model import (
    assemble_batch,
    batch_features,
    encode_batch,
    encoder_from_tensors,
    encoder_to_tensors,
    init_encoder_state,
    relation_universe,
)
from sigmacode.nn import zero_grads

from conftest import small_encoder


def test_relation_universe_fixed():
    rels = relation_universe()
    assert len(rels) == 23
    assert rels[-1] == "pool"
    base = rels[:11]
    assert base == sorted(base)
    assert rels[11:22] == ["inv_" + r for r in base]
    assert "dep" in base and "alias" in base and "control_dep" in base


def test_assemble_batch_layout(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:5])
    batch = assemble_batch(gs, unit_encoder)
    assert batch.n_nodes == sum(len(g.nodes) for g in gs)
    assert batch.virtual_rows is None
    offset = 0
    for g, (lo, hi) in zip(gs, batch.real_slices):
        assert (lo, hi) == (offset, offset + len(g.nodes))
        for n in g.nodes:
            row = batch.row_of[(g.method_id, n.id)]
            assert lo <= row < hi
            assert batch.ntypes[row] == n.ntype
            assert batch.features[row] == n.feature
        offset = hi


def test_strict_nodes_share_global_rows(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:6])
    batch = assemble_batch(gs, unit_encoder)
    x = batch_features(batch, unit_encoder)
    vocab = unit_encoder.strict_vocab
    for pos, grow in zip(batch.strict_positions, batch.strict_rows):
        assert vocab[batch.features[pos]] == grow
        assert np.allclose(x.data[pos], unit_encoder.global_embed.data[grow])
    # every ENTRY node in the batch is strict
    entry_rows = [i for i, f in enumerate(batch.features) if f == "ENTRY"]
    assert set(entry_rows) <= set(batch.strict_positions.tolist())


def test_encode_shapes_and_gradient_reaches_global(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:4])
    batch = assemble_batch(gs, unit_encoder)
    h = encode_batch(batch, unit_encoder)
    assert h.data.shape == (batch.n_nodes, unit_encoder.d_out)
    loss = (h * h).sum()
    zero_grads(unit_encoder.named_params())
    loss.backward()
    g = unit_encoder.global_embed.grad
    assert g is not None and np.abs(g).sum() > 0


def test_dropout_changes_training_encoding_only(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:3])
    batch = assemble_batch(gs, unit_encoder)
    h_eval1 = encode_batch(batch, unit_encoder)
    h_eval2 = encode_batch(batch, unit_encoder)
    assert np.array_equal(h_eval1.data, h_eval2.data)
    h_tr = encode_batch(batch, unit_encoder, dropout_rate=0.5, train_mode=True,
                        rng=np.random.default_rng(0))
    assert not np.array_equal(h_tr.data, h_eval1.data)
    # same rng seed reproduces the same masked encoding
    h_tr2 = encode_batch(batch, unit_encoder, dropout_rate=0.5, train_mode=True,
                         rng=np.random.default_rng(0))
    assert np.array_equal(h_tr.data, h_tr2.data)


def test_virtual_nodes(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:4])
    batch = assemble_batch(gs, unit_encoder, virtual=True)
    assert batch.virtual_rows is not None and len(batch.virtual_rows) == 4
    assert batch.n_nodes == sum(len(g.nodes) for g in gs) + 4
    assert "pool" in batch.rel_edges
    src, dst, _ = batch.rel_edges["pool"]
    # pool edges run from every real node to its graph's virtual node
    assert len(src) == sum(len(g.nodes) for g in gs)
    assert set(dst.tolist()) == set(batch.virtual_rows)
    h = encode_batch(batch, unit_encoder)
    assert h.data.shape[0] == batch.n_nodes


def test_encoder_tensor_round_trip(unit_corpus, unit_encoder):
    corpus, _ = unit_corpus
    gs = with_inverse_edges(corpus.graphs[:5])
    h1 = encode_batch(assemble_batch(gs, unit_encoder), unit_encoder)
    tensors, meta = encoder_to_tensors(unit_encoder)
    enc2 = encoder_from_tensors(tensors, meta)
    h2 = encode_batch(assemble_batch(gs, enc2), enc2)
    assert np.array_equal(h1.data, h2.data)
    assert enc2.dims == unit_encoder.dims
    assert enc2.strict_vocab == unit_encoder.strict_vocab


def test_same_seed_same_encoder(unit_corpus):
    corpus, _ = unit_corpus
    a = small_encoder(corpus, seed=11)
    b = small_encoder(corpus, seed=11)
    for (na, ta), (nb, tb) in zip(sorted(a.named_params().items()),
                                  sorted(b.named_params().items())):
        assert na == nb and np.array_equal(ta.data, tb.data)
    c = small_encoder(corpus, seed=12)
    assert not np.array_equal(
        a.rgcn.layers[0].rel_weights["dep"].data,
        c.rgcn.layers[0].rel_weights["dep"].data,
    )


def test_embedder_dim_must_match_input_width(unit_corpus):
    corpus, _ = unit_corpus
    emb = SubwordEmbedder(dim=20, seed=0)
    enc = init_encoder_state(0, corpus.tying.strict_vocab, [20, 12], emb)
    assert enc.d_in == 20 and enc.d_out == 12
    assert enc.global_embed.data.shape == (len(corpus.tying.strict_vocab), 20)
