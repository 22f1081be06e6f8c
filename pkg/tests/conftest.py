import warnings

import pytest

from sevdx import corpusio
from sevdx.cli import default_synth_config
from sevdx.hierarchy import TrainSettings, train_flat, train_hierarchical
from sevdx.learners import ForestConfig
from sevdx.ontology import default_ontology


@pytest.fixture(scope="session")
def ont():
    return default_ontology()


@pytest.fixture(scope="session")
def small_corpus(ont):
    cfg = default_synth_config(ont, n_parts=600, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return corpusio.generate_synth(cfg, ont)


@pytest.fixture(scope="session")
def small_settings():
    return TrainSettings(forest=ForestConfig(n_trees=5, max_depth=10), seed=0)


@pytest.fixture(scope="session")
def hier_model(ont, small_corpus, small_settings):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return train_hierarchical(small_corpus, ont, small_settings)


@pytest.fixture(scope="session")
def flat_model(ont, small_corpus, small_settings):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return train_flat(small_corpus, ont, small_settings)
