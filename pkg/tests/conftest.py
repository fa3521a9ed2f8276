import numpy as np
import pytest

from cryscreen import evaluation, model_store, svm
from cryscreen.pipeline import PipelineConfig
from cryscreen.synth import generate_synthetic_corpus


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """6 subjects per class x 2 recordings, seed 7; shared by most tests."""
    root = tmp_path_factory.mktemp("corpus")
    generate_synthetic_corpus(root, n_subjects_per_class=6,
                              recordings_per_subject=2, seed=7)
    return root


@pytest.fixture(scope="session")
def small_entries(small_corpus_dir):
    return evaluation.load_corpus(small_corpus_dir)


@pytest.fixture(scope="session")
def pipeline_cfg():
    return PipelineConfig()


@pytest.fixture(scope="session")
def trained(small_entries, pipeline_cfg):
    """Model trained on the small corpus with pinned hyperparameters."""
    split = evaluation.split_by_subject(small_entries, 0.8, seed=1)
    model, report = evaluation.train_and_evaluate(
        small_entries, pipeline_cfg, svm.TrainConfig(seed=1), split)
    return model, report, split


@pytest.fixture(scope="session")
def model_path(trained, pipeline_cfg, tmp_path_factory):
    model, _, _ = trained
    path = tmp_path_factory.mktemp("models") / "small.ubw"
    model_store.save_model(model, pipeline_cfg, path)
    return path


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2024)
