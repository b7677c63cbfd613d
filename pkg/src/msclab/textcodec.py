"""Text <-> bit conversion and sentence segmentation.

Characters are carried as 8-bit values, most significant bit first.  Source
text must be 7-bit ASCII; decoded text may contain arbitrary byte values
(channel corruption is preserved verbatim), so the byte->str direction uses
latin-1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAD_CHAR = "\x00"


class AsciiEncodingError(ValueError):
    def __init__(self, offset: int, char: str):
        self.offset = offset
        self.char = char
        super().__init__(f"non-ASCII character {char!r} at offset {offset}")


def to_bits(text: str) -> np.ndarray:
    """Encode 7-bit ASCII text as a bit array, 8 bits per character,
    MSB first."""
    for i, ch in enumerate(text):
        if ord(ch) > 127:
            raise AsciiEncodingError(i, ch)
    return chars_to_bits(text)


def chars_to_bits(text: str) -> np.ndarray:
    """Like to_bits but tolerant of the full 0..255 range, for re-encoding
    possibly corrupted decoder output."""
    try:
        raw = text.encode("latin-1")
    except UnicodeEncodeError as exc:
        raise AsciiEncodingError(exc.start, text[exc.start]) from None
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))


def from_bits(bits) -> str:
    """Decode a bit array (length a multiple of 8) to text, preserving any
    byte values the channel produced."""
    b = np.asarray(bits, dtype=np.uint8)
    if b.ndim != 1 or b.size % 8:
        raise ValueError("bit array length must be a multiple of 8")
    return np.packbits(b).tobytes().decode("latin-1")


@dataclass(frozen=True)
class SentenceFrame:
    """A sentence split into q equal segments of segment_len characters,
    padded at the end with NUL."""

    text: str
    q: int
    segment_len: int
    pad_len: int

    @property
    def padded(self) -> str:
        return self.text + PAD_CHAR * self.pad_len

    @property
    def segments(self) -> list[str]:
        p, l = self.padded, self.segment_len
        return [p[i * l:(i + 1) * l] for i in range(self.q)]

    @property
    def segment_bits(self) -> list[np.ndarray]:
        return [chars_to_bits(s) for s in self.segments]


def segment(text: str, q: int | None,
            segment_len: int | None = None) -> SentenceFrame:
    """Split ``text`` into q segments.

    With segment_len omitted, the text is NUL-padded up to the next multiple
    of q characters and the segment length follows.  Passing segment_len pads
    to exactly q * segment_len (the text must fit).  q=None derives the
    segment count from segment_len instead (smallest q that fits the text).
    """
    if not text:
        raise ValueError("cannot segment empty text")
    if q is None:
        if segment_len is None:
            raise ValueError("need q or segment_len")
        q = -(-len(text) // segment_len)
    if q < 1:
        raise ValueError("q must be >= 1")
    if segment_len is None:
        segment_len = -(-len(text) // q)
    total = q * segment_len
    if len(text) > total:
        raise ValueError(f"text of length {len(text)} exceeds q*segment_len={total}")
    return SentenceFrame(text=text, q=q, segment_len=segment_len,
                         pad_len=total - len(text))


def reassemble(frame: SentenceFrame, segment_texts: list[str]) -> str:
    """Concatenate per-segment texts and strip the frame's trailing pad.

    Corrupted characters (including corrupted pad positions) are kept as-is;
    only the number of characters the original padding added is removed.
    """
    if len(segment_texts) != frame.q:
        raise ValueError(f"expected {frame.q} segments, got {len(segment_texts)}")
    for i, s in enumerate(segment_texts):
        if len(s) != frame.segment_len:
            raise ValueError(f"segment {i} has length {len(s)}, "
                             f"expected {frame.segment_len}")
    joined = "".join(segment_texts)
    return joined[: len(joined) - frame.pad_len] if frame.pad_len else joined


def load_corpus(path) -> list[str]:
    """Read one sentence per line; raises if any line is not pure ASCII."""
    sentences, rejected = load_corpus_report(path)
    if rejected:
        raise ValueError(f"{rejected} non-ASCII line(s) in corpus {path}")
    return sentences


def load_corpus_report(path) -> tuple[list[str], int]:
    """Lenient corpus reader: returns (ascii_sentences, rejected_count)."""
    kept: list[str] = []
    rejected = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if all(ord(c) < 128 for c in line):
                kept.append(line)
            else:
                rejected += 1
    return kept, rejected
