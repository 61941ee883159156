import pytest

from fedtrend import corpus, data
from fedtrend.experiment import ExperimentConfig


@pytest.fixture(scope="session")
def preprocess_cfg():
    return corpus.default_preprocess_config()


@pytest.fixture(scope="session")
def msmarco_docs(preprocess_cfg):
    docs = corpus.load_corpus(data.msmarco_corpus_path(), "lines")
    return [corpus.preprocess(d, preprocess_cfg) for d in docs]


@pytest.fixture(scope="session")
def msmarco_vocab():
    return corpus.load_idf_table(data.idf_table_path())


def make_experiment_config(**overrides) -> ExperimentConfig:
    base = dict(
        corpus_path=str(data.msmarco_corpus_path()),
        idf_path=str(data.idf_table_path()),
        stopword_path=str(data.stopwords_path()),
        n_users=10,
        k=5,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture
def experiment_config():
    return make_experiment_config
