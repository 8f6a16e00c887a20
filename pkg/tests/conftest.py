from __future__ import annotations

import pytest

from lexsel.corpus import CorpusConfig, SentencePair, Token
from lexsel.synth import make_planted_corpus, planted_corpus_config


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            status = "PASS" if report.passed else "FAIL"
            print(f"\n[acceptance {marker.args[0]}] {marker.args[1]}: {status}",
                  flush=True)


def make_pair(sent_id, src_specs, tgt_lemmas, align):
    """src_specs: (lemma, upos) or (lemma, upos, sense) or full token dicts."""
    src = []
    for i, spec in enumerate(src_specs):
        if isinstance(spec, dict):
            src.append(Token(index=i, surface=spec.get("surface", spec["lemma"]),
                             lemma=spec["lemma"], upos=spec["upos"],
                             head=spec.get("head"), deprel=spec.get("deprel"),
                             sense=spec.get("sense")))
        else:
            lemma, upos, *rest = spec
            src.append(Token(index=i, surface=lemma, lemma=lemma, upos=upos,
                             sense=rest[0] if rest else None))
    tgt = tuple(Token(index=j, surface=lemma, lemma=lemma)
                for j, lemma in enumerate(tgt_lemmas))
    return SentencePair(id=sent_id, src=tuple(src), tgt=tgt, align=frozenset(align))


@pytest.fixture(scope="session")
def planted_corpus():
    return make_planted_corpus(seed=7)


@pytest.fixture(scope="session")
def planted_config():
    return planted_corpus_config()


@pytest.fixture
def basic_config():
    return CorpusConfig(stopwords=frozenset({"the", "a", "of"}))
