"""Domain records: boxes, regions, scenes, samples and dataset splits."""

from src.models.base_model import BaseModel
from src.models.region import Box, Region
from src.models.sample import DatasetSplit, Sample, Scene, SPLIT_NAMES

__all__ = [
    "BaseModel",
    "Box",
    "Region",
    "DatasetSplit",
    "Sample",
    "Scene",
    "SPLIT_NAMES",
]
