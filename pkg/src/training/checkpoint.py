"""
Binary checkpoints of model parameters and optimizer state.

Layout::

    b"TDUCKPT\\0"                 8-byte magic
    uint32 little-endian          manifest length in bytes
    manifest                      UTF-8 JSON: format_version, model_config,
                                  step, adamw_t, tensors [{name, shape}]
    tensor data                   little-endian float32, manifest order

Optimizer moments are stored as ``adamw.m.<param>`` and ``adamw.v.<param>``
after the parameters. Files are written to a temporary name and renamed.
"""

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from src.core.errors.exceptions import (
    CheckpointError,
    CheckpointShapeError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)
from src.core.logging.logger import Logger
from src.nn.config import ModelConfig
from src.nn.uniter import TargetDependentUniter
from src.numerics.optim import AdamWState
from src.numerics.tensor import Tensor

MAGIC = b'TDUCKPT\x00'
FORMAT_VERSION = 1
_LENGTH = struct.Struct('<I')
_FLOAT = np.dtype('<f4')
M_PREFIX = 'adamw.m.'
V_PREFIX = 'adamw.v.'

PathLike = Union[str, Path]

logger = Logger.get_logger(__name__)


@dataclass
class Checkpoint:
    """Contents of a checkpoint file."""

    config: ModelConfig
    tensors: Dict[str, np.ndarray]
    optimizer: Optional[AdamWState] = None
    step: int = 0
    order: List[str] = field(default_factory=list)


def save_checkpoint(
    path: PathLike,
    model: TargetDependentUniter,
    optimizer: Optional[AdamWState] = None,
    step: int = 0
) -> Path:
    """
    Write parameters (and optionally AdamW moments) to ``path``.

    Missing moments are written as zeros so every parameter has both.

    Returns:
        The written path
    """
    path = Path(path)
    params = model.named_parameters()
    entries: List[tuple] = [(name, t.data) for name, t in params.items()]
    if optimizer is not None:
        for prefix, moments in ((M_PREFIX, optimizer.m), (V_PREFIX, optimizer.v)):
            for name, t in params.items():
                entries.append((prefix + name, moments.get(name, np.zeros_like(t.data))))

    manifest = {
        'format_version': FORMAT_VERSION,
        'model_config': model.config.to_dict(),
        'step': int(step),
        'adamw_t': None if optimizer is None else int(optimizer.t),
        'tensors': [{'name': name, 'shape': list(array.shape)} for name, array in entries],
    }
    header = json.dumps(manifest, sort_keys=True, separators=(',', ':')).encode('utf-8')

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + '.tmp')
    with open(tmp, 'wb') as f:
        f.write(MAGIC)
        f.write(_LENGTH.pack(len(header)))
        f.write(header)
        for _, array in entries:
            f.write(np.ascontiguousarray(array, dtype=_FLOAT).tobytes())
    os.replace(tmp, path)
    logger.debug(f"Saved checkpoint {path} ({len(entries)} tensors, step {step})")
    return path


def _read_exact(data: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(data):
        raise CheckpointTruncatedError(
            f"Checkpoint truncated while reading {what}",
            {'needed': offset + size, 'available': len(data)}
        )
    return data[offset:offset + size]


def load_checkpoint(path: PathLike) -> Checkpoint:
    """
    Read a checkpoint file.

    Raises:
        CheckpointError: If the file is missing, not a checkpoint or has a
            bad manifest
        CheckpointVersionError: If the format version differs
        CheckpointTruncatedError: If the payload is shorter or longer than
            the manifest says
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}", {'path': str(path)})
    data = path.read_bytes()

    if _read_exact(data, 0, len(MAGIC), 'magic') != MAGIC:
        raise CheckpointError(f"Not a checkpoint file: {path}", {'path': str(path)})
    offset = len(MAGIC)
    (length,) = _LENGTH.unpack(_read_exact(data, offset, _LENGTH.size, 'manifest length'))
    offset += _LENGTH.size
    raw = _read_exact(data, offset, length, 'manifest')
    offset += length
    try:
        manifest = json.loads(raw.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Corrupt checkpoint manifest: {e}", {'path': str(path)}) from e

    if not isinstance(manifest, dict) or 'tensors' not in manifest or 'model_config' not in manifest:
        raise CheckpointError("Checkpoint manifest lacks tensors or model_config", {'path': str(path)})
    version = manifest.get('format_version')
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"Unsupported checkpoint version {version}",
            {'found': version, 'expected': FORMAT_VERSION}
        )

    tensors: Dict[str, np.ndarray] = {}
    order: List[str] = []
    for entry in manifest['tensors']:
        shape = tuple(int(d) for d in entry['shape'])
        count = int(np.prod(shape, dtype=np.int64))
        chunk = _read_exact(data, offset, count * _FLOAT.itemsize, entry['name'])
        offset += len(chunk)
        tensors[entry['name']] = np.frombuffer(chunk, dtype=_FLOAT).reshape(shape).astype(np.float32)
        order.append(entry['name'])
    if offset != len(data):
        raise CheckpointTruncatedError(
            "Checkpoint has trailing bytes after the last tensor",
            {'expected': offset, 'size': len(data)}
        )

    optimizer = None
    if manifest.get('adamw_t') is not None:
        optimizer = AdamWState(t=int(manifest['adamw_t']))
        for name in order:
            if name.startswith(M_PREFIX):
                optimizer.m[name[len(M_PREFIX):]] = tensors[name]
            elif name.startswith(V_PREFIX):
                optimizer.v[name[len(V_PREFIX):]] = tensors[name]

    return Checkpoint(
        ModelConfig.from_dict(manifest['model_config']),
        tensors,
        optimizer,
        int(manifest.get('step', 0)),
        order,
    )


def load_parameters(model: TargetDependentUniter, checkpoint: Checkpoint,
                    strict: bool = True) -> List[str]:
    """
    Copy checkpoint values into a model's parameters.

    Args:
        model: Model whose tensors are overwritten in place
        checkpoint: Loaded checkpoint
        strict: Require every model parameter to be present

    Returns:
        Names of the parameters that were loaded

    Raises:
        CheckpointShapeError: If a stored shape differs from the model's, or
            (strict) a parameter is missing
    """
    loaded = []
    for name, tensor in model.named_parameters().items():
        stored = checkpoint.tensors.get(name)
        if stored is None:
            if strict:
                raise CheckpointShapeError(f"Checkpoint lacks parameter {name}", {'name': name})
            continue
        if stored.shape != tensor.shape:
            raise CheckpointShapeError(
                f"Shape mismatch for {name}",
                {'name': name, 'stored': stored.shape, 'model': tensor.shape}
            )
        tensor.data = stored.astype(tensor.dtype).copy()
        tensor.grad = None
        loaded.append(name)
    return loaded


def restore_model(checkpoint: Checkpoint) -> TargetDependentUniter:
    """Build a model from a checkpoint's config and fill in its parameters."""
    model = TargetDependentUniter(checkpoint.config)
    load_parameters(model, checkpoint, strict=True)
    return model


def optimizer_for(model: TargetDependentUniter, checkpoint: Checkpoint) -> AdamWState:
    """
    Validate and copy a checkpoint's optimizer state.

    Raises:
        CheckpointError: If the checkpoint has no optimizer state
        CheckpointShapeError: If a moment's shape differs from its parameter
    """
    if checkpoint.optimizer is None:
        raise CheckpointError("Checkpoint carries no optimizer state")
    state = AdamWState(t=checkpoint.optimizer.t)
    params: Dict[str, Tensor] = model.named_parameters()
    for name, tensor in params.items():
        for source, target in ((checkpoint.optimizer.m, state.m), (checkpoint.optimizer.v, state.v)):
            moment = source.get(name)
            if moment is None or moment.shape != tensor.shape:
                raise CheckpointShapeError(
                    f"Optimizer moment for {name} missing or misshapen",
                    {'name': name}
                )
            target[name] = moment.astype(tensor.dtype).copy()
    return state
