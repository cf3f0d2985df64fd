import random

import pytest

from sigmacode.corpus import assemble_corpus, split_corpus
from sigmacode.embed import SubwordEmbedder
from sigmacode.frontend import generate_family_method, parse_method_text
from sigmacode.graphbuild import build_sigma0, build_sigma1
from sigmacode.model import init_encoder_state


def camel(subs):
    return subs[0] + "".join(s.capitalize() for s in subs[1:])


def family_texts(n_packages, per_package, seed):
    """(method_id, name, text) triples, grouped by package, deterministic."""
    out = []
    for p in range(n_packages):
        pkg = f"pkg{p:03d}"
        rng = random.Random(seed * 1009 + p)
        for i in range(per_package):
            subs, text = generate_family_method(rng)
            name = camel(subs)
            out.append((pkg, f"{pkg}/{name}@{i}", name, text))
    return out


def family_corpus(n_packages, per_package, seed, flavor="sigma1", split_seed=None):
    build = build_sigma1 if flavor == "sigma1" else build_sigma0
    graphs, packages, names = [], {}, {}
    for pkg, mid, name, text in family_texts(n_packages, per_package, seed):
        graphs.append(build(parse_method_text(text), mid))
        names[mid] = name
        packages.setdefault(pkg, []).append(mid)
    corpus = assemble_corpus(graphs, packages)
    if split_seed is not None:
        split_corpus(corpus, seed=split_seed)
    return corpus, names


def small_encoder(corpus, dims=(20, 16, 16), seed=7, embed_seed=0):
    emb = SubwordEmbedder(dim=dims[0], seed=embed_seed)
    return init_encoder_state(seed, corpus.tying.strict_vocab, list(dims), emb)


@pytest.fixture(scope="session")
def unit_corpus():
    corpus, names = family_corpus(5, 8, seed=3, split_seed=1)
    return corpus, names


@pytest.fixture(scope="session")
def unit_encoder(unit_corpus):
    corpus, _ = unit_corpus
    return small_encoder(corpus)
