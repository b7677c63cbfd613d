#!/usr/bin/env python3
"""Generate the committed evaluation corpus (500 sentences, 57-64 chars).

Sentences come from a small template grammar.  Roughly half of them appear
in minimal pairs: the same sentence with one word swapped for a same-length
word one character away ("night"/"light").  Pairs give closed-corpus lookup
providers realistic near-misses, which is exactly the failure mode the
list-decoding stage is supposed to repair from channel evidence.

Deterministic: python3 tools/gen_corpus.py > src/msclab/data/corpus500.txt
"""
import numpy as np

SUBJECTS = ["farmer", "sailor", "teacher", "doctor", "singer", "runner",
            "walker", "writer", "keeper", "trader", "hunter", "driver"]
PAIRS = [("night", "light"), ("mouse", "house"), ("stone", "store"),
         ("train", "trail"), ("sound", "round"), ("grass", "glass"),
         ("cold", "bold"), ("late", "gate"), ("fine", "wine"),
         ("calm", "palm"), ("bread", "break"), ("coast", "toast"),
         ("cart", "card"), ("lamp", "camp"), ("mill", "hill"),
         ("rain", "main"), ("sand", "band"), ("tide", "ride")]
NOUNS = ["valley", "garden", "meadow", "harbor", "market", "bridge",
         "forest", "stream", "cellar", "attic", "corner", "square"]
VERBS = ["watched", "crossed", "reached", "circled", "skirted", "passed",
         "mapped", "painted", "visited", "guarded", "cleaned", "studied"]
TAILS = ["before the early bells rang out",
         "while the fog settled in slowly",
         "as the last wagon rolled away",
         "until the lanterns burned low",
         "before anyone else was awake",
         "while the kettle hissed softly",
         "as thin smoke curled upward",
         "until the gulls went quiet",
         "after the long rains ended",
         "while the clock ticked on"]


def build(rng: np.random.Generator) -> tuple[str, str | None]:
    subj = SUBJECTS[rng.integers(len(SUBJECTS))]
    pair = PAIRS[rng.integers(len(PAIRS))]
    keep, swap = (pair[0], pair[1]) if rng.random() < 0.5 else (pair[1], pair[0])
    noun = NOUNS[rng.integers(len(NOUNS))]
    verb = VERBS[rng.integers(len(VERBS))]
    tail = TAILS[rng.integers(len(TAILS))]
    sent = f"the {subj} {verb} the {keep} {noun} {tail}"
    twin = f"the {subj} {verb} the {swap} {noun} {tail}"
    return sent, twin


def main() -> None:
    rng = np.random.default_rng(20240917)
    out: list[str] = []
    seen: set[str] = set()
    while len(out) < 500:
        sent, twin = build(rng)
        if not (57 <= len(sent) <= 64) or sent in seen:
            continue
        emit_twin = rng.random() < 0.55 and twin not in seen and len(out) < 499
        if emit_twin and rng.random() < 0.5:
            sent, twin = twin, sent
        out.append(sent)
        seen.add(sent)
        if emit_twin:
            out.append(twin)
            seen.add(twin)
    print("\n".join(out[:500]))


if __name__ == "__main__":
    main()
