"""
Text and image embedders.

The text embedder maps each token to
``layer_norm(fc([W_inst[id], W_pos[position]]))``; the image embedder maps
each region to ``layer_norm(fc_out([fc_feat(feat), fc_loc(location)]))``.
Neither applies dropout.
"""

from typing import Sequence, Tuple

import numpy as np

from src.core.errors.exceptions import DimensionError, ValidationError
from src.data.boxes import BoxLike, to_box
from src.models.region import Region
from src.nn.config import LOCATION_DIM
from src.nn.params import ImageEmbedderParams, TextEmbedderParams
from src.numerics import ops
from src.numerics.tensor import Tensor, get_default_dtype
from src.tokenizer.wordpiece import EncodedInstruction


def location_features(bbox: BoxLike, image_w: float, image_h: float) -> np.ndarray:
    """
    Normalised 7-d location vector of a box.

    ``[x1/W, y1/H, x2/W, y2/H, w/W, h/H, (w/W)*(h/H)]``

    Raises:
        ValidationError: If the image size is not positive, the box is
            inverted, or the box lies outside the image
    """
    if image_w <= 0 or image_h <= 0:
        raise ValidationError("image size must be positive", {'size': (image_w, image_h)})
    box = to_box(bbox)
    if not box.inside((image_w, image_h)):
        raise ValidationError("box lies outside the image", {'bbox': box.to_list()})
    w = box.width / image_w
    h = box.height / image_h
    return np.array(
        [box.x1 / image_w, box.y1 / image_h, box.x2 / image_w, box.y2 / image_h, w, h, w * h],
        dtype=np.float64,
    )


def embed_tokens(
    ids: np.ndarray,
    positions: np.ndarray,
    params: TextEmbedderParams,
    eps: float = 1e-12
) -> Tensor:
    """
    Embed token ids at given positions.

    Args:
        ids: Integer array of any shape [...]
        positions: Integer array of the same shape
        params: Text embedder parameters
        eps: Layer-norm epsilon

    Returns:
        Tensor of shape [..., H]

    Raises:
        ValidationError: If an id or position overflows its table
    """
    words = ops.take(params.W_inst, ids)
    places = ops.take(params.W_pos, positions)
    return params.norm(params.fc(ops.concat([words, places], axis=-1)), eps)


def embed_text(enc: EncodedInstruction, params: TextEmbedderParams, eps: float = 1e-12) -> Tensor:
    """Embed one encoded instruction; returns [T, H]."""
    return embed_tokens(
        np.asarray(enc.ids, dtype=np.int64),
        np.asarray(enc.positions, dtype=np.int64),
        params,
        eps,
    )


def embed_regions(
    features: np.ndarray,
    locations: np.ndarray,
    params: ImageEmbedderParams,
    eps: float = 1e-12
) -> Tensor:
    """
    Embed region features with their location vectors.

    Args:
        features: Array [..., D]
        locations: Array [..., 7]
        params: Image embedder parameters
        eps: Layer-norm epsilon

    Returns:
        Tensor of shape [..., H]

    Raises:
        DimensionError: If D differs from the embedder's input width
    """
    dtype = params.fc_feat.W.dtype
    feat = Tensor(np.asarray(features, dtype=dtype))
    loc = Tensor(np.asarray(locations, dtype=dtype))
    if loc.shape[-1:] != (LOCATION_DIM,):
        raise DimensionError("location vectors must be 7-dimensional", loc.shape, (LOCATION_DIM,))
    hidden = ops.concat([params.fc_feat(feat), params.fc_loc(loc)], axis=-1)
    return params.norm(params.fc_out(hidden), eps)


def embed_region(
    region: Region,
    image_size: Sequence[float],
    params: ImageEmbedderParams,
    eps: float = 1e-12
) -> Tensor:
    """Embed one region; returns [H]."""
    loc = location_features(region.bbox, image_size[0], image_size[1])
    return embed_regions(region.feat, loc, params, eps)


def region_arrays(
    target: Region,
    contexts: Sequence[Region],
    image_size: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stack feature and location inputs for the image sequence.

    Returns:
        (features [N+1, D], locations [N+1, 7]) with slot 0 the target

    Raises:
        ValidationError: If contexts are empty or do not contain the target
    """
    if not contexts:
        raise ValidationError("at least one context region is required")
    if target not in contexts:
        raise ValidationError("target region is not among the context regions")
    regions = [target, *contexts]
    dtype = get_default_dtype()
    features = np.stack([r.feat for r in regions]).astype(dtype)
    locations = np.stack([
        location_features(r.bbox, image_size[0], image_size[1]) for r in regions
    ]).astype(dtype)
    return features, locations


def assemble_image_embedding(
    target: Region,
    contexts: Sequence[Region],
    image_size: Sequence[float],
    params: ImageEmbedderParams,
    eps: float = 1e-12
) -> Tensor:
    """
    Build the image sequence: the target slot followed by every context.

    The target therefore appears twice, once in slot 0 and once among the
    contexts.

    Returns:
        Tensor [N+1, H]
    """
    features, locations = region_arrays(target, contexts, image_size)
    return embed_regions(features, locations, params, eps)
