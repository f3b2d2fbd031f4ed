"""Session fixtures: the reference synthetic corpus, generated once and shared."""

from __future__ import annotations

import pytest

from cornersal.evaluate import synth_corpus, write_corpus

CORPUS_SEED = 7
CORPUS_COUNT = 50


@pytest.fixture(scope="session")
def corpus():
    """The 50-sample benchmark corpus used by the acceptance suite."""
    return synth_corpus(CORPUS_SEED, CORPUS_COUNT)


@pytest.fixture(scope="session")
def corpus_dir(corpus, tmp_path_factory):
    """The same corpus written out as an images/ + masks/ dataset directory."""
    out = tmp_path_factory.mktemp("corpus")
    write_corpus(corpus, out)
    return out
