"""
Sample transforms used by the ablation variants.
"""

import math
from typing import List, Sequence

from src.models.sample import Sample


def halve_contexts(sample: Sample) -> Sample:
    """
    Keep the ceil(N/2) context regions with the highest detector score.

    Ties are broken by region index. The target region is always kept: if it
    was cut, it replaces the lowest-ranked kept region. Surviving regions
    keep their original relative order.

    Args:
        sample: Sample with N >= 1 context regions

    Returns:
        New sample with at most ceil(N/2) contexts
    """
    n = len(sample.contexts)
    keep = math.ceil(n / 2)
    if keep == n:
        return sample
    ranked = sorted(range(n), key=lambda i: (-sample.contexts[i].score, i))
    kept = ranked[:keep]
    target = sample.target_index
    if target not in kept:
        kept[-1] = target
    return sample.with_contexts([sample.contexts[i] for i in sorted(kept)])


def halve_all(samples: Sequence[Sample]) -> List[Sample]:
    """Apply :func:`halve_contexts` to every sample."""
    return [halve_contexts(s) for s in samples]
