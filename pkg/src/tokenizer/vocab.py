"""
WordPiece vocabulary: building, saving and loading.
"""

import re
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

from src.core.errors.exceptions import DataError, ValidationError

PAD_TOKEN = '[PAD]'
UNK_TOKEN = '[UNK]'
MASK_TOKEN = '[MASK]'
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, MASK_TOKEN)
PAD_ID, UNK_ID, MASK_ID = 0, 1, 2
CONTINUATION = '##'

_NON_WORD = re.compile(r'[^\w\s]|_', re.UNICODE)


def normalize(text: str) -> List[str]:
    """Lowercase, turn punctuation into spaces and split on whitespace."""
    return _NON_WORD.sub(' ', text.lower()).split()


class Vocab:
    """
    Dense token <-> id mapping.

    Ids are 0..V-1 with [PAD]=0, [UNK]=1, [MASK]=2. Continuation pieces carry
    the ``##`` prefix.
    """

    def __init__(self, tokens: Sequence[str]):
        """
        Args:
            tokens: Tokens in id order; must start with the special tokens

        Raises:
            ValidationError: If specials are misplaced or tokens repeat
        """
        tokens = list(tokens)
        if tuple(tokens[:len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ValidationError(
                "vocabulary must start with the special tokens",
                {'expected': SPECIAL_TOKENS, 'found': tokens[:len(SPECIAL_TOKENS)]}
            )
        if len(set(tokens)) != len(tokens):
            duplicates = sorted(t for t, c in Counter(tokens).items() if c > 1)
            raise ValidationError("duplicate vocabulary tokens", {'duplicates': duplicates})
        self.id_to_token: List[str] = tokens
        self.token_to_id: Dict[str, int] = {t: i for i, t in enumerate(tokens)}

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocab) and other.id_to_token == self.id_to_token

    def id_of(self, token: str) -> int:
        """Id of ``token``, or the [UNK] id."""
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self.id_to_token[token_id]

    @property
    def size(self) -> int:
        return len(self)

    def save(self, path: Union[str, Path]) -> None:
        """Write one token per line; the line number is the id."""
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for token in self.id_to_token:
                f.write(token + '\n')

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'Vocab':
        """
        Read a vocabulary file.

        Raises:
            DataError: If the file is missing
        """
        path = Path(path)
        if not path.exists():
            raise DataError(f"Vocabulary file not found: {path}", {'path': str(path)})
        with open(path, 'r', encoding='utf-8') as f:
            tokens = [line.rstrip('\n') for line in f if line.rstrip('\n')]
        return cls(tokens)


def build_vocab(corpus: Iterable[str], target_size: int) -> Vocab:
    """
    Build a vocabulary from raw instruction texts.

    Whole words are added by descending frequency (ties broken
    lexicographically) until ``target_size`` tokens exist. Every word left
    out is then made coverable by adding its first character and ``##``
    single-character continuations, which may take the vocabulary past
    ``target_size``.

    Args:
        corpus: Instruction texts
        target_size: Desired size including the special tokens

    Returns:
        Vocab

    Raises:
        ValidationError: If target_size is below the special count or the
            corpus is empty
    """
    if target_size < len(SPECIAL_TOKENS):
        raise ValidationError(
            "target_size smaller than the number of special tokens",
            {'target_size': target_size, 'specials': len(SPECIAL_TOKENS)}
        )
    counts: Counter = Counter()
    for text in corpus:
        counts.update(normalize(text))
    if not counts:
        raise ValidationError("cannot build a vocabulary from an empty corpus")

    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    room = target_size - len(SPECIAL_TOKENS)
    words = [w for w, _ in ranked[:room]]
    tokens = list(SPECIAL_TOKENS) + words

    known = set(tokens)
    fallback = set()
    for word, _ in ranked[room:]:
        if word[0] not in known:
            fallback.add(word[0])
        fallback.update(CONTINUATION + ch for ch in word[1:] if CONTINUATION + ch not in known)
    tokens.extend(sorted(fallback - known))
    return Vocab(tokens)
