"""
Shared fixtures: a small synthetic corpus, its vocabulary and a tiny model.
"""

import numpy as np
import pytest

from src.data.synthetic import SyntheticDatasetSpec, generate_synthetic_dataset
from src.models.region import Box, Region
from src.models.sample import Sample
from src.nn.config import ModelConfig
from src.nn.uniter import TargetDependentUniter
from src.numerics.prng import PrngState
from src.tokenizer.vocab import build_vocab

IMAGE_SIZE = (100.0, 100.0)


def make_region(values, bbox=(0, 0, 10, 10), score=1.0):
    """Region with the given feature values."""
    return Region(np.asarray(values, dtype=np.float32), Box(*bbox), score)


def make_sample(sample_id='s1', n_contexts=3, target=0, label=1, feature_dim=4,
                instruction='pick up the red cup', seed=0, scores=None):
    """Sample with ``n_contexts`` random regions laid out along the diagonal."""
    rng = PrngState(seed)
    contexts = []
    for i in range(n_contexts):
        x = float(5 * i)
        score = 1.0 if scores is None else scores[i]
        contexts.append(make_region(rng.normal(feature_dim), (x, x, x + 8, x + 8), score))
    return Sample(sample_id, instruction, contexts[target], contexts, IMAGE_SIZE, label)


@pytest.fixture(scope='session')
def small_spec():
    return SyntheticDatasetSpec(n_scenes=30, seed=3)


@pytest.fixture(scope='session')
def small_dataset(small_spec):
    """(scenes, splits) of a 30-scene synthetic corpus."""
    return generate_synthetic_dataset(small_spec)


@pytest.fixture(scope='session')
def small_vocab(small_dataset):
    scenes, _ = small_dataset
    return build_vocab((text for s in scenes for text in s.instructions), 64)


@pytest.fixture
def tiny_config(small_vocab, small_spec):
    return ModelConfig(
        num_layers=2,
        hidden_size=16,
        num_heads=2,
        dropout=0.1,
        max_positions=16,
        max_contexts=16,
        vocab_size=len(small_vocab),
        feature_dim=small_spec.feature_dim,
    )


@pytest.fixture
def tiny_model(tiny_config):
    return TargetDependentUniter(tiny_config, rng=PrngState(0).fork('init'))
