#!/usr/bin/env python3
"""Generate the committed (3,6)-regular LDPC parity-check fixture (96, 48).

Columns are filled greedily: each picks 3 rows with spare capacity such that
no two columns ever share more than one row (girth >= 6, i.e. no length-4
cycles).  Dead ends restart the attempt with a fresh seed stream.

Deterministic: python3 tools/gen_ldpc_alist.py > src/msclab/data/ldpc_96_48.alist
"""
import sys

import numpy as np

sys.path.insert(0, "src")
from msclab.bp import LdpcCode, dump_alist  # noqa: E402

N, M, COL_W, ROW_W = 96, 48, 3, 6


def attempt(rng: np.random.Generator) -> np.ndarray | None:
    h = np.zeros((M, N), dtype=np.uint8)
    cap = np.full(M, ROW_W)
    pairs: set[tuple[int, int]] = set()
    for col in range(N):
        chosen: list[int] = []
        for _ in range(COL_W):
            ok = [r for r in range(M)
                  if cap[r] > 0 and r not in chosen
                  and all((min(r, c), max(r, c)) not in pairs for c in chosen)]
            if not ok:
                return None
            top = max(cap[r] for r in ok)
            best = [r for r in ok if cap[r] == top]
            chosen.append(int(best[rng.integers(len(best))]))
        for r in chosen:
            h[r, col] = 1
            cap[r] -= 1
        for a in range(COL_W):
            for b in range(a + 1, COL_W):
                r1, r2 = sorted((chosen[a], chosen[b]))
                pairs.add((r1, r2))
    return h


def main() -> None:
    for seed in range(1000):
        h = attempt(np.random.default_rng(seed))
        if h is None:
            continue
        gram = (h.astype(np.int64) @ h.T.astype(np.int64))
        off_diag = gram - np.diag(np.diag(gram))
        assert off_diag.max() <= 1, "4-cycle slipped through"
        assert (h.sum(axis=0) == COL_W).all() and (h.sum(axis=1) == ROW_W).all()
        code = LdpcCode(h)
        print(dump_alist(code), end="")
        print(f"seed {seed}, rank {h.shape[1] - code.k}, k={code.k}",
              file=sys.stderr)
        return
    raise SystemExit("no valid matrix found in 1000 attempts")


if __name__ == "__main__":
    main()
