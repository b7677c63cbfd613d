"""Bridge release gate: the external-provider conformance checks, driven
through the primary package's own client, harness, and recorded transcripts."""
import shlex

from _bridge_paths import CORPUS, TRANSCRIPT

from msclab.harness import resolve_config, run_experiment
from msclab.metrics import ScoreRow
from msclab.semantic import (CorrectionRequest, ExternalProcessProvider,
                             mask_segments, replay_transcript)


def test_a13a_transcript_replay(bridge_argv, checklist):
    with ExternalProcessProvider(bridge_argv) as provider:
        failures = replay_transcript(provider,
                                     TRANSCRIPT.read_text().splitlines())
    checklist("A13a recorded-transcript replay through the bridge",
              not failures, "; ".join(failures) or "all lines conform")
    assert failures == []


def test_a13b_fill_returns_exactly_twenty(bridge_argv, checklist):
    sentence = "the cat sat on the mat near the old dog."  # 40 chars, q=20
    masked = mask_segments(sentence, {2, 15}, 2)
    req = CorrectionRequest(mode="fill", text=masked,
                            masked_indices=(2, 15), segment_len=2,
                            num_candidates=20)
    with ExternalProcessProvider(bridge_argv) as provider:
        outputs = provider.fill(req)
    ok = len(outputs) == 20 and all(len(o) == len(sentence) for o in outputs)
    checklist("A13b fill request with V=20 returns 20 candidates",
              ok, f"{len(outputs)} outputs, {len(set(outputs))} distinct")
    assert ok


def test_a13c_end_to_end_fifty_sentences(bridge_argv, checklist):
    doc = {
        "master_seed": 13,
        "snr_db": [3.0],
        "num_sentences": 50,
        "q": 32,
        "code": {"family": "random", "n": 32, "k": 16, "seed": 0,
                 "osd_order": 1},
        "provider": {"kind": "external", "command": shlex.join(bridge_argv)},
        "corpus": str(CORPUS),
        "output": "unused.csv",
    }
    rows, provider_name = run_experiment(resolve_config(doc), workers=1)
    ok = provider_name == "lm_bridge" and len(rows) == 150
    by_sentence: dict[int, list[str]] = {}
    for row in rows:
        ok = ok and isinstance(row, ScoreRow)
        ok = ok and 0.0 <= row.bleu <= 100.0 and 0.0 <= row.rouge_l <= 100.0
        ok = ok and row.time_ms >= 0.0 and row.snr_db == 3.0
        by_sentence.setdefault(row.sentence_index, []).append(row.stage)
    ok = ok and sorted(by_sentence) == list(range(50))
    ok = ok and all(stages == ["msc", "sec", "sld"]
                    for stages in by_sentence.values())
    checklist("A13c 50-sentence end-to-end run through the bridge",
              ok, f"{len(rows)} score rows, provider {provider_name!r}")
    assert ok
