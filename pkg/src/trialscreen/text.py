"""Sentence splitting shared by the extractors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

# sentence ends at . ! ? followed by whitespace or end of text, or at a newline;
# a period between digits ("55.5") never ends a sentence
_BOUNDARY = re.compile(r"[.!?]+(?=\s|$)|\n+")


@dataclass(frozen=True)
class Sentence:
    start: int
    end: int
    text: str


def split_sentences(text: str) -> list[Sentence]:
    """Split ``text`` into sentences with offsets into the original string.

    Terminal punctuation stays with its sentence; surrounding whitespace is
    trimmed and empty pieces dropped.
    """
    out = []
    pos = 0
    for m in _BOUNDARY.finditer(text):
        end = m.end() if m.group(0)[0] != "\n" else m.start()
        _append(out, text, pos, end)
        pos = m.end()
    _append(out, text, pos, len(text))
    return out


def _append(out: list[Sentence], text: str, start: int, end: int) -> None:
    piece = text[start:end]
    stripped = piece.strip()
    if not stripped:
        return
    start += len(piece) - len(piece.lstrip())
    end = start + len(stripped)
    out.append(Sentence(start, end, stripped))


_TOKEN = re.compile(r"\w+(?:[-/']\w+)*")


def tokens(text: str, start: int = 0, end: int | None = None) -> Iterator[re.Match]:
    return _TOKEN.finditer(text, start, len(text) if end is None else end)
