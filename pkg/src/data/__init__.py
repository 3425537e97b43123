"""
Data: overlap labeling, balancing, synthetic scenes, JSONL files and the
context-halving transform. Batching lives in :mod:`src.data.batching`.
"""

from src.data.ablation import halve_all, halve_contexts
from src.data.boxes import iou
from src.data.jsonl_io import read_samples, read_scenes, read_splits, write_samples, write_scenes
from src.data.labeling import balance, label_candidates, preprocess_scenes
from src.data.synthetic import SyntheticDatasetSpec, generate_synthetic_dataset

__all__ = [
    "halve_all",
    "halve_contexts",
    "iou",
    "read_samples",
    "read_scenes",
    "read_splits",
    "write_samples",
    "write_scenes",
    "balance",
    "label_candidates",
    "preprocess_scenes",
    "SyntheticDatasetSpec",
    "generate_synthetic_dataset",
]
