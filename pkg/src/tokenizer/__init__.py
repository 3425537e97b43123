"""WordPiece tokenization of fetching instructions."""

from src.tokenizer.vocab import (
    MASK_ID,
    PAD_ID,
    SPECIAL_TOKENS,
    UNK_ID,
    Vocab,
    build_vocab,
)
from src.tokenizer.wordpiece import EncodedInstruction, encode, wordpiece

__all__ = [
    "MASK_ID",
    "PAD_ID",
    "SPECIAL_TOKENS",
    "UNK_ID",
    "Vocab",
    "build_vocab",
    "EncodedInstruction",
    "encode",
    "wordpiece",
]
