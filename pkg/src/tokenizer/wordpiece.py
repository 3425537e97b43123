"""
Greedy longest-match-first WordPiece tokenization.
"""

from dataclasses import dataclass, field
from typing import List

from src.core.errors.exceptions import ValidationError
from src.tokenizer.vocab import CONTINUATION, UNK_TOKEN, Vocab, normalize

MAX_CHARS_PER_WORD = 100


@dataclass(frozen=True)
class EncodedInstruction:
    """Token ids and their 0-based positions."""

    ids: List[int] = field(default_factory=list)
    positions: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)


def _split_word(word: str, vocab: Vocab) -> List[str]:
    if len(word) > MAX_CHARS_PER_WORD:
        return [UNK_TOKEN]
    pieces: List[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        piece = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION + candidate
            if candidate in vocab:
                piece = candidate
                break
            end -= 1
        if piece is None:
            return [UNK_TOKEN]
        pieces.append(piece)
        start = end
    return pieces


def wordpiece(text: str, vocab: Vocab) -> List[str]:
    """
    Split ``text`` into vocabulary pieces.

    The text is lowercased and punctuation becomes whitespace. Each word is
    matched greedily longest-prefix first; continuation pieces are
    ``##``-prefixed. A word that cannot be covered becomes a single [UNK].

    Args:
        text: Raw instruction
        vocab: Vocabulary

    Returns:
        Token strings (empty for empty text)
    """
    tokens: List[str] = []
    for word in normalize(text):
        tokens.extend(_split_word(word, vocab))
    return tokens


def detokenize(pieces: List[str]) -> List[str]:
    """Rejoin ``##`` continuations into words."""
    words: List[str] = []
    for piece in pieces:
        if piece.startswith(CONTINUATION) and words:
            words[-1] += piece[len(CONTINUATION):]
        else:
            words.append(piece)
    return words


def encode(text: str, vocab: Vocab, max_len: int) -> EncodedInstruction:
    """
    Tokenize and map to ids, keeping the first ``max_len`` tokens.

    Raises:
        ValidationError: If max_len < 1
    """
    if max_len < 1:
        raise ValidationError("max_len must be at least 1", {'max_len': max_len})
    ids = [vocab.id_of(t) for t in wordpiece(text, vocab)][:max_len]
    return EncodedInstruction(ids=ids, positions=list(range(len(ids))))
