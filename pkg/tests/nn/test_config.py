"""
Unit tests for the model shape configuration.
"""

import pytest

from src.core.errors.exceptions import ValidationError
from src.nn.config import ModelConfig


@pytest.mark.unit
class TestModelConfig:

    def test_defaults(self):
        config = ModelConfig()
        assert (config.num_layers, config.hidden_size, config.num_heads) == (2, 768, 12)
        assert config.head_dim == 64
        assert config.ffn_size == 3072
        assert config.max_sequence == 32 + 16 + 1

    def test_heads_must_divide_hidden(self):
        with pytest.raises(ValidationError):
            ModelConfig(hidden_size=10, num_heads=3)

    def test_positive_sizes(self):
        with pytest.raises(ValidationError):
            ModelConfig(num_layers=0)

    def test_unknown_fusion(self):
        with pytest.raises(ValidationError):
            ModelConfig(fusion='middle')

    def test_late_fusion_needs_two_layers(self):
        with pytest.raises(ValidationError):
            ModelConfig(num_layers=1, fusion='late')

    @pytest.mark.parametrize('layers,split', [(2, 1), (3, 2), (4, 2)])
    def test_late_split(self, layers, split):
        assert ModelConfig(num_layers=layers, fusion='late').late_split == split

    def test_dict_round_trip(self):
        config = ModelConfig(hidden_size=16, num_heads=4, fusion='late')
        assert ModelConfig.from_dict(config.to_dict()) == config

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValidationError):
            ModelConfig.from_dict({'hidden_size': 16, 'num_heads': 4, 'depth': 3})
