"""
JSONL reading and writing for samples and scenes.

One JSON object per line, UTF-8, keys sorted so that identical data always
produces identical bytes. Records are validated when loaded.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, TypeVar, Union

from src.core.errors.exceptions import BaseApplicationError, DataError
from src.core.logging.logger import Logger
from src.models.sample import SPLIT_NAMES, DatasetSplit, Sample, Scene

T = TypeVar('T')
PathLike = Union[str, Path]

SCENES_FILE = 'scenes.jsonl'
META_FILE = 'meta.json'
VOCAB_FILE = 'vocab.txt'

logger = Logger.get_logger(__name__)


def dump_json(data: Any) -> str:
    """Canonical JSON text (sorted keys, compact separators)."""
    return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def write_records(path: PathLike, records: Iterable[Dict[str, Any]]) -> int:
    """
    Write dictionaries as JSON lines.

    Returns:
        Number of lines written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for record in records:
            f.write(dump_json(record))
            f.write('\n')
            count += 1
    return count


def read_records(path: PathLike, parse: Callable[[Dict[str, Any]], T]) -> List[T]:
    """
    Read JSON lines and parse each into a record.

    Args:
        path: JSONL file
        parse: Builds (and validates) a record from a dictionary

    Raises:
        DataError: If the file is missing or a line is malformed, naming the
            line number
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"File not found: {path}", {'path': str(path)})
    items: List[T] = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                items.append(parse(json.loads(line)))
            except json.JSONDecodeError as e:
                raise DataError(
                    f"Invalid JSON at {path}:{lineno}: {e.msg}",
                    {'path': str(path), 'line': lineno}
                ) from e
            except BaseApplicationError as e:
                raise DataError(
                    f"Invalid record at {path}:{lineno}: {e.message}",
                    {'path': str(path), 'line': lineno, **e.details}
                ) from e
    return items


def write_samples(path: PathLike, samples: Iterable[Sample]) -> int:
    return write_records(path, (s.to_dict() for s in samples))


def read_samples(path: PathLike) -> List[Sample]:
    return read_records(path, Sample.from_dict)


def write_scenes(path: PathLike, scenes: Iterable[Scene]) -> int:
    return write_records(path, (s.to_dict() for s in scenes))


def read_scenes(path: PathLike) -> List[Scene]:
    return read_records(path, Scene.from_dict)


def write_splits(directory: PathLike, splits: DatasetSplit) -> Dict[str, Path]:
    """
    Write ``train.jsonl``, ``validation.jsonl`` and ``test.jsonl``.

    Returns:
        Mapping of split name to written path
    """
    directory = Path(directory)
    paths = {}
    for name, samples in splits.items():
        paths[name] = directory / f"{name}.jsonl"
        write_samples(paths[name], samples)
    return paths


def read_splits(directory: PathLike) -> DatasetSplit:
    """
    Load the three split files of a data directory.

    Raises:
        DataError: If any split file is missing or invalid
    """
    directory = Path(directory)
    loaded = [read_samples(directory / f"{name}.jsonl") for name in SPLIT_NAMES]
    splits = DatasetSplit(*loaded)
    logger.info(f"Loaded splits from {directory}: {splits.counts()}")
    return splits


def write_json(path: PathLike, data: Any) -> None:
    """Write one canonical JSON document followed by a newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dump_json(data))
        f.write('\n')


def read_json(path: PathLike) -> Any:
    """
    Raises:
        DataError: If the file is missing or not valid JSON
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"File not found: {path}", {'path': str(path)})
    with open(path, 'r', encoding='utf-8') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"Invalid JSON in {path}: {e.msg}", {'path': str(path)}) from e
