"""
Unit tests for end-to-end gradient verification.
"""

import pytest

from src.numerics.prng import PrngState
from src.numerics.tensor import get_default_dtype
from src.training.diagnostics import TINY_CONFIG, gradient_check, parameter_audit, random_batch


@pytest.mark.unit
class TestRandomBatch:

    def test_padding_in_last_row(self):
        batch = random_batch(TINY_CONFIG, PrngState(0), batch_size=3, text_length=5, contexts=4)
        assert batch.text_ids.shape == (3, 5)
        assert batch.features.shape == (3, 5, TINY_CONFIG.feature_dim)
        assert batch.text_mask.sum(axis=1).tolist() == [5, 5, 4]
        assert batch.region_mask.sum(axis=1).tolist() == [5, 5, 4]


@pytest.mark.unit
class TestGradientCheck:

    def test_early_fusion_passes(self):
        report = gradient_check(max_entries_per_tensor=3)
        assert report.passed(1e-5), report.per_parameter
        assert report.checked_entries > 0
        assert not any(name.startswith(('mlm.', 'itm.')) for name in report.per_parameter)
        assert get_default_dtype().name == 'float32'

    def test_late_fusion_passes(self):
        report = gradient_check(TINY_CONFIG.replace(fusion='late'), seed=1, max_entries_per_tensor=3)
        assert report.passed(1e-5), report.per_parameter
        assert 'fusion.W' in report.per_parameter

    @pytest.mark.slow
    def test_every_entry(self):
        assert gradient_check().passed(1e-5)


@pytest.mark.unit
class TestParameterAudit:

    def test_tiny_shapes(self):
        audit = parameter_audit(TINY_CONFIG)
        assert audit.late - audit.early == 2 * 16 * 16 + 16
