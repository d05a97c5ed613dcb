import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402

DATA_DIR = Path(__file__).parent.parent / "src" / "emoread" / "data"


@pytest.fixture(scope="session")
def toy_vectors_path():
    return DATA_DIR / "toy_vectors_16d.txt"


@pytest.fixture(scope="session")
def toy_lexicon_path():
    return DATA_DIR / "toy_lexicon.tsv"


@pytest.fixture(scope="session")
def toy_gazetteer_path():
    return DATA_DIR / "toy_gazetteer.tsv"


@pytest.fixture(scope="session")
def small_corpus():
    return synth.make_corpus(n_docs=60, seed=101)


@pytest.fixture(scope="session")
def small_table():
    return synth.make_embeddings(dim=16, seed=102)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
