"""Linear block codes over GF(2): constructions, encoding, CRC augmentation,
and rate-compatible puncturing schedules for incremental redundancy.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .gf2 import RankDeficientError


@dataclass(eq=False)
class LinearCode:
    """A binary (n, k) linear block code given by a full-rank generator.

    ``source`` is a human-readable label describing where the code came from
    (construction name, seed, or file path); it is carried into result rows.
    """

    n: int
    k: int
    generator: np.ndarray
    parity_check: np.ndarray | None = None
    d_min: int | None = None
    source: str = "unspecified"
    _info_cols: np.ndarray = field(init=False, repr=False)
    _info_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = gf2.to_gf2(self.generator)
        if g.shape != (self.k, self.n):
            raise ValueError(
                f"generator shape {g.shape} does not match (k={self.k}, n={self.n})"
            )
        if self.n < 1 or self.k < 1 or self.k > self.n:
            raise ValueError(f"bad code parameters n={self.n}, k={self.k}")
        self.generator = g
        red, pivots = gf2.row_reduce(g)
        if len(pivots) < self.k:
            raise RankDeficientError("generator rows are linearly dependent")
        self._info_cols = np.array(pivots, dtype=np.int64)
        self._info_inv = gf2.inverse(g[:, self._info_cols])
        if self.parity_check is not None:
            h = gf2.to_gf2(self.parity_check)
            if h.shape[1] != self.n:
                raise ValueError("parity-check width does not match n")
            if gf2.matmul(g, h.T).any():
                raise ValueError("parity-check does not annihilate the generator")
            self.parity_check = h

    @property
    def rate(self) -> float:
        return self.k / self.n

    def info_from_codeword(self, codeword: np.ndarray) -> np.ndarray:
        """Recover the information word b with b @ G == codeword.

        Assumes ``codeword`` lies in the row space of the generator.
        """
        c = np.asarray(codeword, dtype=np.uint8)
        return gf2.matmul(c[self._info_cols], self._info_inv)


def encode(code: LinearCode, info) -> np.ndarray:
    """Encode a length-k information word to its length-n codeword."""
    b = np.asarray(info, dtype=np.uint8)
    if b.shape != (code.k,):
        raise ValueError(f"information word must have length {code.k}, got {b.shape}")
    return gf2.matmul(b, code.generator)


def parity_check_from_generator(g: np.ndarray) -> np.ndarray:
    """Parity-check matrix for a generator (any full-rank form)."""
    return gf2.nullspace(g)


def random_code(n: int, k: int, seed: int) -> LinearCode:
    """Random systematic code: G = [I_k | P] with i.i.d. uniform P."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    rng = np.random.default_rng(seed)
    p = rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)
    g = np.concatenate([np.eye(k, dtype=np.uint8), p], axis=1)
    h = np.concatenate([p.T, np.eye(n - k, dtype=np.uint8)], axis=1)
    return LinearCode(n, k, g, parity_check=h, source=f"random({n},{k},seed={seed})")


def repetition_code(n: int) -> LinearCode:
    g = np.ones((1, n), dtype=np.uint8)
    return LinearCode(n, 1, g, d_min=n, source=f"repetition({n})")


def extended_hamming_8_4() -> LinearCode:
    """The (8, 4) extended Hamming code, d_min = 4."""
    p = np.array(
        [[0, 1, 1, 1],
         [1, 0, 1, 1],
         [1, 1, 0, 1],
         [1, 1, 1, 0]], dtype=np.uint8)
    g = np.concatenate([np.eye(4, dtype=np.uint8), p], axis=1)
    h = np.concatenate([p.T, np.eye(4, dtype=np.uint8)], axis=1)
    return LinearCode(8, 4, g, parity_check=h, d_min=4, source="ext-hamming(8,4)")


def min_distance(code: LinearCode) -> int:
    """Minimum Hamming distance by exhaustive enumeration of 2^k - 1 nonzero
    codewords.  Refused for k > 24.
    """
    if code.k > 24:
        raise ValueError(f"exhaustive distance scan refused for k={code.k} > 24")
    best = code.n
    chunk = 1 << 14
    g64 = code.generator.astype(np.int64)
    for start in range(1, 1 << code.k, chunk):
        idx = np.arange(start, min(start + chunk, 1 << code.k), dtype=np.uint64)
        # bit j of idx -> info bit j
        infos = (idx[:, None] >> np.arange(code.k, dtype=np.uint64)) & 1
        words = (infos.astype(np.int64) @ g64) & 1
        best = min(best, int(words.sum(axis=1).min()))
    return best


# ---------------------------------------------------------------------------
# Text serialization.  Format: first line "n k", then one row per line of
# space-separated 0/1 entries (k rows for a generator, n-k for a parity check).
# ---------------------------------------------------------------------------

def load_matrix_text(text: str) -> tuple[np.ndarray, int, int]:
    """Parse the matrix text format; returns (matrix, n, k)."""
    lines = [ln.strip() for ln in io.StringIO(text) if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"header must be 'n k', got {lines[0]!r}")
    n, k = int(head[0]), int(head[1])
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        row = [int(t) for t in ln.split()]
        if len(row) != n:
            raise ValueError(f"line {i}: expected {n} entries, got {len(row)}")
        if any(v not in (0, 1) for v in row):
            raise ValueError(f"line {i}: entries must be 0/1")
        rows.append(row)
    return np.array(rows, dtype=np.uint8), n, k


def dump_matrix_text(m: np.ndarray, n: int, k: int) -> str:
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in m)
    return f"{n} {k}\n{body}\n"


def load_generator_text(text: str, source: str = "file") -> LinearCode:
    m, n, k = load_matrix_text(text)
    if m.shape[0] != k:
        raise ValueError(f"generator must have k={k} rows, got {m.shape[0]}")
    return LinearCode(n, k, m, source=source)


# ---------------------------------------------------------------------------
# CRC augmentation
# ---------------------------------------------------------------------------

CRC_SPECS = {
    "crc8": (8, 0x07, 0x00),
    "crc16-ccitt": (16, 0x1021, 0xFFFF),
}


def crc_bits(bits: np.ndarray, width: int, poly: int, init: int) -> np.ndarray:
    """Bit-serial CRC over a bit string (MSB-first register), as an array of
    ``width`` bits, most significant first."""
    reg = init
    top = 1 << (width - 1)
    mask = (1 << width) - 1
    for b in np.asarray(bits, dtype=np.uint8):
        fb = ((reg >> (width - 1)) & 1) ^ int(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return np.array([(reg >> (width - 1 - i)) & 1 for i in range(width)],
                    dtype=np.uint8)


def crc_augment(k: int, spec: str):
    """Build (append, check) callables for a CRC spec over bit payloads.

    ``append(payload)`` maps k - width payload bits to k bits with the CRC in
    the trailing positions; ``check(word)`` validates a k-bit word.
    """
    if spec not in CRC_SPECS:
        raise ValueError(f"unknown CRC spec {spec!r}; known: {sorted(CRC_SPECS)}")
    width, poly, init = CRC_SPECS[spec]
    if k <= width:
        raise ValueError(f"k={k} leaves no payload after a {width}-bit CRC")

    def append(payload) -> np.ndarray:
        p = np.asarray(payload, dtype=np.uint8)
        if p.shape != (k - width,):
            raise ValueError(f"payload must have length {k - width}")
        return np.concatenate([p, crc_bits(p, width, poly, init)])

    def check(word) -> bool:
        w = np.asarray(word, dtype=np.uint8)
        if w.shape != (k,):
            raise ValueError(f"word must have length {k}")
        return bool(np.array_equal(crc_bits(w[: k - width], width, poly, init),
                                   w[k - width:]))

    return append, check


# ---------------------------------------------------------------------------
# Incremental-redundancy schedules
# ---------------------------------------------------------------------------

@dataclass
class MotherCodeSchedule:
    """A low-rate mother code plus disjoint per-round position sets.

    Round r of a transmission sends the mother codeword restricted to
    ``round_positions[r-1]``; the union of rounds 1..r must keep rank k so the
    punctured code stays decodable.
    """

    mother: LinearCode
    round_positions: list[np.ndarray]

    def __post_init__(self):
        seen: set[int] = set()
        for i, pos in enumerate(self.round_positions):
            arr = np.asarray(pos, dtype=np.int64)
            if arr.size == 0:
                raise ValueError(f"round {i + 1} has no positions")
            if arr.min() < 0 or arr.max() >= self.mother.n:
                raise ValueError(f"round {i + 1} positions out of range")
            s = set(arr.tolist())
            if len(s) != arr.size or s & seen:
                raise ValueError("round position sets must be disjoint")
            seen |= s
            self.round_positions[i] = arr
        # earliest rounds must already expose an information set
        first = np.sort(self.round_positions[0])
        if gf2.rank(self.mother.generator[:, first]) < self.mother.k:
            raise RankDeficientError("round-1 positions do not span the code")

    @property
    def rounds(self) -> int:
        return len(self.round_positions)


def puncture(schedule: MotherCodeSchedule, round: int) -> LinearCode:
    """Code seen after receiving rounds 1..round, columns in ascending
    mother-position order."""
    if not 1 <= round <= schedule.rounds:
        raise ValueError(f"round must be in 1..{schedule.rounds}")
    pos = np.sort(np.concatenate(schedule.round_positions[:round]))
    g = schedule.mother.generator[:, pos]
    if gf2.rank(g) < schedule.mother.k:
        raise RankDeficientError("restricted generator loses rank")
    return LinearCode(len(pos), schedule.mother.k, g,
                      source=f"{schedule.mother.source}|rounds<={round}")


def split_schedule(mother: LinearCode, first_n: int) -> MotherCodeSchedule:
    """Two-round schedule: the first ``first_n`` positions, then the rest."""
    if not mother.k <= first_n < mother.n:
        raise ValueError("first_n must be in [k, n)")
    return MotherCodeSchedule(
        mother,
        [np.arange(first_n), np.arange(first_n, mother.n)],
    )
