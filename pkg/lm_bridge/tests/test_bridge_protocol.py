"""Wire-protocol behavior of the serve loop, driven over real pipes."""
import json
import subprocess

import pytest

from lm_bridge.model import MASK_TEXT
from lm_bridge.serve import expected_length


@pytest.fixture
def proc(bridge_argv):
    p = subprocess.Popen(bridge_argv, stdin=subprocess.PIPE,
                         stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                         text=True, bufsize=1)
    yield p
    p.stdin.close()
    p.wait(timeout=30)


def ask(p, obj_or_line) -> dict:
    line = (obj_or_line if isinstance(obj_or_line, str)
            else json.dumps(obj_or_line))
    p.stdin.write(line + "\n")
    p.stdin.flush()
    return json.loads(p.stdout.readline())


def test_handshake_precedes_any_response(proc):
    hello = json.loads(proc.stdout.readline())
    assert hello == {"ready": True, "provider": "lm_bridge"}
    resp = ask(proc, {"id": 7, "mode": "correct", "text": "abcd",
                      "masked_indices": [], "segment_len": 2,
                      "num_candidates": 1})
    assert resp["id"] == 7
    assert resp["error"] is None


def test_fill_count_length_and_no_placeholder(proc):
    proc.stdout.readline()
    resp = ask(proc, {"id": 1, "mode": "fill", "text": "AAAA<mask>CCCC",
                      "masked_indices": [1], "segment_len": 4,
                      "num_candidates": 3})
    assert resp["error"] is None
    assert len(resp["outputs"]) == 3
    for out in resp["outputs"]:
        assert len(out) == 12
        assert MASK_TEXT not in out
        assert all(ord(c) < 128 for c in out)


def test_malformed_line_answers_with_null_id(proc):
    proc.stdout.readline()
    resp = ask(proc, "this is not json")
    assert resp["id"] is None
    assert resp["outputs"] == []
    assert resp["error"]
    # the process must survive a bad line
    again = ask(proc, {"id": 2, "mode": "correct", "text": "xy",
                       "masked_indices": [], "segment_len": 1,
                       "num_candidates": 1})
    assert again["id"] == 2
    assert again["error"] is None


def test_unknown_mode_is_a_request_error(proc):
    proc.stdout.readline()
    resp = ask(proc, {"id": 3, "mode": "paraphrase", "text": "xy",
                      "masked_indices": [], "segment_len": 1,
                      "num_candidates": 1})
    assert resp["id"] == 3
    assert "mode" in resp["error"]
    assert ask(proc, {"id": 4, "mode": "correct", "text": "xy",
                      "masked_indices": [], "segment_len": 1,
                      "num_candidates": 1})["error"] is None


def test_correct_returns_one_output_of_input_length(proc):
    proc.stdout.readline()
    text = "the dog barked twice."
    resp = ask(proc, {"id": 5, "mode": "correct", "text": text,
                      "masked_indices": [], "segment_len": 3,
                      "num_candidates": 1})
    assert len(resp["outputs"]) == 1
    assert len(resp["outputs"][0]) == len(text)


def test_fill_candidates_are_not_all_identical(proc):
    # diverse beam groups must actually spread the list out
    proc.stdout.readline()
    resp = ask(proc, {"id": 6, "mode": "fill",
                      "text": "the <mask>ran far away today.",
                      "masked_indices": [2], "segment_len": 2,
                      "num_candidates": 8})
    assert len(resp["outputs"]) == 8
    assert len(set(resp["outputs"])) > 1


def test_expected_length_arithmetic():
    assert expected_length("AAAA<mask>CCCC", 4) == 12
    assert expected_length("<mask><mask>ZZ", 3) == 8
    assert expected_length("plain text", 5) == 10
