"""WordPunct pre-tokenization and the BPE / WordPiece / Unigram subword models."""
from __future__ import annotations

import warnings
from typing import Iterable, Mapping, Sequence

from ckbprep.tokenizers.bpe import train_bpe
from ckbprep.tokenizers.model import (
    BOUNDARY,
    KINDS,
    ModelFormatError,
    SubwordModel,
    TrainerConfig,
    dumps_model,
    load_model,
    loads_model,
    save_model,
)
from ckbprep.tokenizers.unigram import train_unigram
from ckbprep.tokenizers.wordpiece import is_continuation, train_wordpiece
from ckbprep.tokenizers.wordpunct import WORDPUNCT_RE, count_pretokens, wordpunct_tokenize

__all__ = [
    "BOUNDARY", "KINDS", "ModelFormatError", "SubwordModel", "TrainerConfig", "UnknownPieceError",
    "count_pretokens", "decode", "dumps_model", "encode", "load_model", "loads_model",
    "save_model", "train", "train_bpe", "train_unigram", "train_wordpiece", "wordpunct_tokenize",
]


class UnknownPieceError(ValueError):
    pass


def train(kind: str, word_counts: Mapping[str, int], config: TrainerConfig = TrainerConfig(),
          fingerprint: str = "", shards: int = 1) -> SubwordModel:
    if kind == "bpe":
        return train_bpe(word_counts, config, fingerprint)
    if kind == "wordpiece":
        return train_wordpiece(word_counts, config, fingerprint)
    if kind == "unigram":
        return train_unigram(word_counts, config, fingerprint, shards=shards)
    raise ValueError(f"unknown tokenizer kind {kind!r}")


def encode(model: SubwordModel, text: str, fingerprint: str | None = None) -> list[str]:
    """Segment ``text`` into pieces.

    The first piece of every pre-token that follows whitespace carries the
    ``BOUNDARY`` prefix so that ``decode`` can restore the spacing.
    """
    if fingerprint is not None and fingerprint != model.normalization_fingerprint:
        warnings.warn(
            f"normalization fingerprint {fingerprint!r} differs from the model's "
            f"{model.normalization_fingerprint!r}",
            stacklevel=2,
        )
    pieces: list[str] = []
    for m in WORDPUNCT_RE.finditer(text):
        seg = model.segment(m.group())
        if m.start() > 0 and text[m.start() - 1].isspace():
            seg[0] = BOUNDARY + seg[0]
        pieces.extend(seg)
    return pieces


def decode(model: SubwordModel, pieces: Sequence[str]) -> str:
    known = model.piece_to_id
    prefix = model.continuation_prefix
    out = []
    for piece in pieces:
        initial = False
        if piece.startswith(BOUNDARY) and piece[1:] in known:
            out.append(" ")
            piece = piece[1:]
            initial = True
        if piece not in known:
            raise UnknownPieceError(f"unknown piece {piece!r}")
        if prefix and not initial and is_continuation(piece, prefix):
            out.append(piece[len(prefix):])
        else:
            out.append(piece)
    return "".join(out)


def encode_lines(model: SubwordModel, lines: Iterable[str]) -> list[list[str]]:
    return [encode(model, line) for line in lines]
