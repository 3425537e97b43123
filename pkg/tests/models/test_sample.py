"""
Unit tests for Sample, Scene and DatasetSplit.
"""

import pytest

from src.core.errors.exceptions import ValidationError
from src.models.region import Box
from src.models.sample import DatasetSplit, Sample, Scene, max_context_count
from tests.conftest import IMAGE_SIZE, make_region, make_sample


@pytest.mark.unit
class TestSample:
    """Test suite for Sample."""

    def test_create_valid_sample(self):
        sample = make_sample(n_contexts=3, target=1)
        assert sample.target_index == 1
        assert sample.feature_dim == 4
        assert sample.label == 1

    def test_target_must_be_a_context(self):
        sample = make_sample(n_contexts=2)
        stranger = make_region([9, 9, 9, 9])
        with pytest.raises(ValidationError):
            Sample('s2', 'x', stranger, sample.contexts, IMAGE_SIZE, 0)

    def test_label_must_be_binary(self):
        sample = make_sample()
        with pytest.raises(ValidationError):
            Sample('s2', 'x', sample.target, sample.contexts, IMAGE_SIZE, 2)
        with pytest.raises(ValidationError):
            Sample('s2', 'x', sample.target, sample.contexts, IMAGE_SIZE, True)

    def test_contexts_required(self):
        region = make_region([1, 2])
        with pytest.raises(ValidationError):
            Sample('s2', 'x', region, [], IMAGE_SIZE, 0)

    def test_region_outside_image(self):
        region = make_region([1, 2], bbox=(0, 0, 200, 10))
        with pytest.raises(ValidationError):
            Sample('s2', 'x', region, [region], IMAGE_SIZE, 0)

    def test_invalid_id(self):
        sample = make_sample()
        with pytest.raises(ValidationError):
            Sample('bad id', 'x', sample.target, sample.contexts, IMAGE_SIZE, 0)

    def test_context_bound(self):
        sample = make_sample(n_contexts=5)
        sample.check_context_bound(5)
        with pytest.raises(ValidationError):
            sample.check_context_bound(4)

    def test_dict_round_trip(self):
        sample = make_sample(n_contexts=3, target=2, label=0)
        restored = Sample.from_dict(sample.to_dict())
        assert restored.to_dict() == sample.to_dict()

    def test_with_target(self):
        sample = make_sample(n_contexts=3, target=0)
        other = sample.with_target(sample.contexts[2])
        assert other.target_index == 2
        assert sample.target_index == 0

    def test_max_context_count(self):
        assert max_context_count([make_sample(n_contexts=2), make_sample('s2', n_contexts=6)]) == 6
        assert max_context_count([]) == 0


@pytest.mark.unit
class TestScene:
    """Test suite for Scene."""

    def test_instruction_box_pairing(self):
        region = make_region([1, 0])
        with pytest.raises(ValidationError):
            Scene('scene1', IMAGE_SIZE, [region], ['pick up the cup'], [])

    def test_unknown_split(self):
        with pytest.raises(ValidationError):
            Scene('scene1', IMAGE_SIZE, [], [], [], split='holdout')

    def test_dict_round_trip(self):
        scene = Scene('scene1', IMAGE_SIZE, [make_region([1, 0])], ['pick up the cup'],
                      [Box(0, 0, 10, 10)], 'validation')
        assert Scene.from_dict(scene.to_dict()).to_dict() == scene.to_dict()


@pytest.mark.unit
class TestDatasetSplit:
    """Test suite for DatasetSplit."""

    def test_ids_unique_across_splits(self):
        with pytest.raises(ValidationError):
            DatasetSplit([make_sample('a')], [make_sample('a')], [])

    def test_counts_and_get(self):
        split = DatasetSplit([make_sample('a'), make_sample('b')], [make_sample('c')], [])
        assert split.counts() == {'train': 2, 'validation': 1, 'test': 0}
        assert split.get('validation')[0].sample_id == 'c'
        with pytest.raises(ValidationError):
            split.get('dev')
