"""
Target-dependent UNITER.

A from-scratch transformer that judges whether a candidate image region is
the object a fetching instruction refers to:
- Core Infrastructure: configuration, logging and error handling
- Numerics: tensors, reverse-mode autodiff, AdamW
- Tokenizer, embedders, transformer and the assembled model
- Data: IoU labeling, balancing, synthetic scenes
- Training: schedule, evaluation, checkpoints, model selection
- User Interface: the ``tdu`` command line
"""

__version__ = "1.0.0"

__all__ = [
    "__version__",
]
