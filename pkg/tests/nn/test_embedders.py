"""
Unit tests for the text and image embedders.
"""

import numpy as np
import pytest

from src.core.errors.exceptions import DimensionError, ValidationError
from src.nn.config import ModelConfig
from src.nn.embedders import (
    assemble_image_embedding,
    embed_regions,
    embed_text,
    embed_tokens,
    location_features,
)
from src.nn.params import init_model_params
from src.numerics.prng import PrngState
from src.tokenizer.wordpiece import EncodedInstruction
from tests.conftest import IMAGE_SIZE, make_sample


@pytest.fixture
def params():
    config = ModelConfig(hidden_size=8, num_heads=2, max_positions=6, vocab_size=12, feature_dim=4)
    return init_model_params(config, PrngState(0))


@pytest.mark.unit
class TestLocationFeatures:

    def test_full_image(self):
        np.testing.assert_allclose(location_features((0, 0, 640, 480), 640, 480),
                                   [0, 0, 1, 1, 1, 1, 1])

    def test_normalised_corners_and_area(self):
        np.testing.assert_allclose(location_features((10, 20, 30, 60), 100, 200),
                                   [0.1, 0.1, 0.3, 0.3, 0.2, 0.2, 0.04])

    def test_inverted_box(self):
        with pytest.raises(ValidationError):
            location_features((30, 20, 10, 60), 100, 200)

    def test_outside_image(self):
        with pytest.raises(ValidationError):
            location_features((10, 20, 130, 60), 100, 200)

    def test_non_positive_image(self):
        with pytest.raises(ValidationError):
            location_features((0, 0, 1, 1), 0, 10)


@pytest.mark.unit
class TestTextEmbedder:

    def test_shape_and_normalisation(self, params):
        enc = EncodedInstruction(ids=[3, 4, 5], positions=[0, 1, 2])
        out = embed_text(enc, params.text).numpy()
        assert out.shape == (3, 8)
        np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-5)
        np.testing.assert_allclose(out.var(axis=-1), 1.0, atol=1e-3)

    def test_position_changes_embedding(self, params):
        ids = np.array([3, 3])
        out = embed_tokens(ids, np.array([0, 1]), params.text).numpy()
        assert not np.allclose(out[0], out[1])

    def test_id_out_of_range(self, params):
        with pytest.raises(ValidationError):
            embed_tokens(np.array([12]), np.array([0]), params.text)

    def test_position_out_of_range(self, params):
        with pytest.raises(ValidationError):
            embed_tokens(np.array([3]), np.array([6]), params.text)


@pytest.mark.unit
class TestImageEmbedder:

    def test_target_slot_repeats_its_context(self, params):
        sample = make_sample(n_contexts=3, target=2)
        out = assemble_image_embedding(sample.target, sample.contexts, IMAGE_SIZE, params.image).numpy()
        assert out.shape == (4, 8)
        np.testing.assert_allclose(out[0], out[3])
        assert not np.allclose(out[0], out[1])

    def test_location_dimension_checked(self, params):
        with pytest.raises(DimensionError):
            embed_regions(np.zeros((2, 4)), np.zeros((2, 6)), params.image)

    def test_target_must_be_a_context(self, params):
        sample = make_sample(n_contexts=3)
        other = make_sample(n_contexts=3, seed=5)
        with pytest.raises(ValidationError):
            assemble_image_embedding(other.target, sample.contexts, IMAGE_SIZE, params.image)
