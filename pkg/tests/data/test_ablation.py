"""
Unit tests for context halving.
"""

import pytest

from src.data.ablation import halve_all, halve_contexts
from tests.conftest import make_sample


@pytest.mark.unit
class TestHalveContexts:

    def test_single_context_unchanged(self):
        sample = make_sample(n_contexts=1)
        assert halve_contexts(sample) is sample

    def test_equal_scores_keep_first_by_index(self):
        sample = make_sample(n_contexts=4, target=0)
        halved = halve_contexts(sample)
        assert halved.contexts == sample.contexts[:2]

    def test_target_reinserted(self):
        scores = [0.9, 0.8, 0.7, 0.6, 0.1]
        sample = make_sample(n_contexts=5, target=4, scores=scores)
        halved = halve_contexts(sample)
        assert len(halved.contexts) == 3
        assert halved.target in halved.contexts
        assert halved.contexts == [sample.contexts[i] for i in (0, 1, 4)]

    def test_highest_scores_kept_in_original_order(self):
        scores = [0.1, 0.9, 0.5, 0.8]
        sample = make_sample(n_contexts=4, target=1, scores=scores)
        assert halve_contexts(sample).contexts == [sample.contexts[1], sample.contexts[3]]

    def test_halve_all(self):
        samples = [make_sample('a', n_contexts=6), make_sample('b', n_contexts=3)]
        assert [len(s.contexts) for s in halve_all(samples)] == [3, 2]
