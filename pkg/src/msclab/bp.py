"""Belief-propagation decoding of LDPC codes (flooding schedule, sum-product
with the tanh rule) and MacKay 'alist' parity-check I/O.

Intended for desk-scale baselines: dimensions stay small, clarity wins over
throughput.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .channel import SoftObservation

_TANH_CLIP = 0.999999


class AlistParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"alist line {line}: {message}")


@dataclass(eq=False)
class LdpcCode:
    """Sparse parity-check code; k is n minus the rank of H."""

    h: np.ndarray
    max_iterations: int = 50
    n: int = field(init=False)
    m: int = field(init=False)
    k: int = field(init=False)

    def __post_init__(self):
        self.h = gf2.to_gf2(self.h)
        self.m, self.n = self.h.shape
        self.k = self.n - gf2.rank(self.h)
        self.row_neighbors = [np.nonzero(self.h[i])[0] for i in range(self.m)]
        self.col_neighbors = [np.nonzero(self.h[:, j])[0] for j in range(self.n)]

    def syndrome(self, bits) -> np.ndarray:
        return gf2.matmul(self.h, np.asarray(bits, dtype=np.uint8))


@dataclass(frozen=True)
class BpResult:
    codeword: np.ndarray
    converged: bool
    iterations_used: int


def bp_decode(code: LdpcCode, obs: SoftObservation,
              max_iterations: int | None = None) -> BpResult:
    """Flooding sum-product decode from channel LLRs 2y/sigma^2.

    Positions with observation value exactly 0 contribute a zero LLR, which
    covers punctured/not-yet-received positions.  Stops early as soon as the
    running hard decision satisfies every check; ``converged`` is True iff
    that happened within the iteration budget, so a converged result always
    has a zero syndrome.
    """
    iters = code.max_iterations if max_iterations is None else max_iterations
    if len(obs) != code.n:
        raise ValueError(f"observation length {len(obs)} != n={code.n}")
    llr = obs.llr
    # v2c[i][s]: message from the s-th neighbor variable of check i
    v2c = [llr[nb].copy() for nb in code.row_neighbors]
    c2v = [np.zeros(nb.size) for nb in code.row_neighbors]
    hard = obs.hard_decision
    for it in range(1, iters + 1):
        for i, nb in enumerate(code.row_neighbors):
            t = np.clip(np.tanh(v2c[i] / 2.0), -_TANH_CLIP, _TANH_CLIP)
            full = np.prod(t)
            # leave-one-out product; recompute exactly when a term is tiny
            with np.errstate(divide="ignore", invalid="ignore"):
                loo = full / t
            bad = ~np.isfinite(loo) | (np.abs(t) < 1e-12)
            for s in np.nonzero(bad)[0]:
                loo[s] = np.prod(np.delete(t, s))
            c2v[i] = 2.0 * np.arctanh(np.clip(loo, -_TANH_CLIP, _TANH_CLIP))
        total = llr.copy()
        for i, nb in enumerate(code.row_neighbors):
            total[nb] += c2v[i]
        hard = (total < 0).astype(np.uint8)
        if not code.syndrome(hard).any():
            return BpResult(hard, True, it)
        for i, nb in enumerate(code.row_neighbors):
            v2c[i] = total[nb] - c2v[i]
    return BpResult(hard, False, iters)


# ---------------------------------------------------------------------------
# alist format
# ---------------------------------------------------------------------------

def load_alist(text: str) -> LdpcCode:
    """Parse MacKay alist text into an LdpcCode.

    Layout: "n m", "max_col max_row", n column degrees... actually the column
    degree list and row degree list each live on one line, followed by one
    neighbor line per column (1-based row indices, zero-padded) and one per
    row.  Malformed input raises AlistParseError with the offending line.
    """
    lines = text.splitlines()

    def need(idx: int) -> str:
        if idx >= len(lines):
            raise AlistParseError(idx + 1, "unexpected end of file")
        return lines[idx]

    def ints(idx: int, count: int | None = None) -> list[int]:
        try:
            vals = [int(t) for t in need(idx).split()]
        except ValueError:
            raise AlistParseError(idx + 1, f"non-integer token in {need(idx)!r}")
        if count is not None and len(vals) != count:
            raise AlistParseError(idx + 1, f"expected {count} integers, got {len(vals)}")
        return vals

    n, m = ints(0, 2)
    if n <= 0 or m <= 0:
        raise AlistParseError(1, "dimensions must be positive")
    max_col, max_row = ints(1, 2)
    col_deg = ints(2, n)
    row_deg = ints(3, m)
    if max(col_deg) > max_col:
        raise AlistParseError(3, "column degree exceeds declared maximum")
    if max(row_deg) > max_row:
        raise AlistParseError(4, "row degree exceeds declared maximum")
    h = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        vals = ints(4 + j)
        vals = [v for v in vals if v != 0]
        if len(vals) != col_deg[j]:
            raise AlistParseError(5 + j, f"column {j + 1} lists {len(vals)} "
                                         f"rows, degree says {col_deg[j]}")
        for v in vals:
            if not 1 <= v <= m:
                raise AlistParseError(5 + j, f"row index {v} out of range")
            h[v - 1, j] = 1
    for i in range(m):
        vals = [v for v in ints(4 + n + i) if v != 0]
        if len(vals) != row_deg[i]:
            raise AlistParseError(5 + n + i, f"row {i + 1} lists {len(vals)} "
                                             f"columns, degree says {row_deg[i]}")
        for v in vals:
            if not 1 <= v <= n:
                raise AlistParseError(5 + n + i, f"column index {v} out of range")
            if h[i, v - 1] != 1:
                raise AlistParseError(5 + n + i,
                                      f"row/column lists disagree at ({i + 1},{v})")
    return LdpcCode(h)


def dump_alist(code: LdpcCode) -> str:
    """Canonical alist text: sorted neighbor lists, zero padding to the
    maximum degree."""
    col_deg = [nb.size for nb in code.col_neighbors]
    row_deg = [nb.size for nb in code.row_neighbors]
    max_col, max_row = max(col_deg), max(row_deg)
    out = [f"{code.n} {code.m}", f"{max_col} {max_row}",
           " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for j in range(code.n):
        vals = [str(i + 1) for i in sorted(code.col_neighbors[j])]
        vals += ["0"] * (max_col - col_deg[j])
        out.append(" ".join(vals))
    for i in range(code.m):
        vals = [str(j + 1) for j in sorted(code.row_neighbors[i])]
        vals += ["0"] * (max_row - row_deg[i])
        out.append(" ".join(vals))
    return "\n".join(out) + "\n"
