"""
Unit tests for candidate labeling, balancing and preprocessing.
"""

from collections import Counter

import pytest

from src.core.errors.exceptions import DataError
from src.data.jsonl_io import dump_json
from src.data.labeling import balance, label_candidates, preprocess_scenes, samples_for_scene
from src.models.region import Box
from src.models.sample import Scene
from src.numerics.prng import PrngState
from tests.conftest import IMAGE_SIZE, make_region, make_sample


def samples_with(positives, negatives):
    return (
        [make_sample(f"p{i}", label=1) for i in range(positives)]
        + [make_sample(f"n{i}", label=0) for i in range(negatives)]
    )


@pytest.mark.unit
class TestLabelCandidates:

    def test_thresholds(self):
        gt = Box(0, 0, 10, 10)
        exact = make_region([1, 0], (0, 0, 10, 10))
        far = make_region([0, 1], (50, 50, 60, 60))
        half = make_region([1, 1], (0, 0, 10, 5))
        result = label_candidates([exact, far, half], gt)
        assert result.labeled == [(exact, 1), (far, 0)]
        assert result.discarded == [half]

    def test_boundaries_excluded(self):
        gt = Box(0, 0, 10, 10)
        at_positive = make_region([1], (0, 0, 10, 7))
        at_negative = make_region([1], (0, 0, 10, 3))
        result = label_candidates([at_positive, at_negative], gt)
        assert result.labeled == []
        assert len(result.discarded) == 2


@pytest.mark.unit
class TestBalance:

    def test_downsamples_negatives(self):
        out = balance(samples_with(10, 25), PrngState(0))
        assert Counter(s.label for s in out) == {1: 10, 0: 10}

    def test_downsamples_positives(self):
        out = balance(samples_with(5, 3), PrngState(0))
        assert Counter(s.label for s in out) == {1: 3, 0: 3}

    def test_already_balanced(self):
        samples = samples_with(4, 4)
        out = balance(samples, PrngState(0))
        assert sorted(s.sample_id for s in out) == sorted(s.sample_id for s in samples)

    def test_subset_and_deterministic(self):
        samples = samples_with(6, 20)
        first = balance(samples, PrngState(8))
        second = balance(samples, PrngState(8))
        assert [s.sample_id for s in first] == [s.sample_id for s in second]
        assert {s.sample_id for s in first} <= {s.sample_id for s in samples}

    def test_empty_class(self):
        with pytest.raises(DataError):
            balance(samples_with(3, 0), PrngState(0))


@pytest.mark.unit
class TestPreprocess:

    @pytest.fixture
    def scene(self):
        regions = [
            make_region([1, 0], (0, 0, 10, 10)),
            make_region([0, 1], (40, 40, 50, 50)),
            make_region([1, 1], (5, 0, 15, 10)),
        ]
        return Scene('scene1', IMAGE_SIZE, regions, ['pick up the cup'], [Box(0, 0, 10, 10)])

    def test_mid_overlap_kept_as_context(self, scene):
        samples = samples_for_scene(scene)
        assert [s.sample_id for s in samples] == ['scene1-i0-r0', 'scene1-i0-r1']
        assert [s.label for s in samples] == [1, 0]
        assert all(len(s.contexts) == 3 for s in samples)

    def test_max_contexts(self, scene):
        samples = samples_for_scene(scene, max_contexts=2)
        assert all(len(s.contexts) == 2 for s in samples)

    def test_splits_balanced(self, small_dataset):
        _, splits = small_dataset
        for name, samples in splits.items():
            labels = Counter(s.label for s in samples)
            assert labels[0] == labels[1] > 0, name

    def test_deterministic(self, small_dataset):
        scenes, _ = small_dataset
        first = preprocess_scenes(scenes, PrngState(1))
        second = preprocess_scenes(scenes, PrngState(1))
        assert dump_json(first.to_dict()) == dump_json(second.to_dict())
