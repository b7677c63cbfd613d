import math
import sys

import numpy as np
import pytest

from msclab.semantic import (MASK, CandidateProvider, CorrectionRequest,
                             DictionaryProvider, ExternalProcessProvider,
                             IdentityProvider, NgramProvider, ProviderError,
                             extract, mask_segments, parse_masked,
                             replay_transcript)

from _paths import DATA

SENT = "AAAABBBBCCCCDDDD"  # 4 segments of 4


def _stub(mode: str) -> list[str]:
    return [sys.executable, str(DATA / "stub_provider.py"), mode]


# --- masking ----------------------------------------------------------------

def test_mask_single_segment():
    assert mask_segments(SENT, {1}, 4) == "AAAA<mask>CCCCDDDD"


def test_mask_leading_run():
    assert mask_segments(SENT, {0, 1}, 4) == "<mask><mask>CCCCDDDD"


def test_mask_empty_set_is_identity():
    assert mask_segments(SENT, set(), 4) == SENT


def test_mask_validates_input():
    with pytest.raises(ValueError):
        mask_segments("AAAB", {0}, 3)
    with pytest.raises(ValueError):
        mask_segments(SENT, {4}, 4)
    with pytest.raises(ValueError):
        mask_segments(SENT, {-1}, 4)


def test_parse_masked_round_trip():
    masked = mask_segments(SENT, {0, 2}, 4)
    segs = parse_masked(masked, [0, 2], 4)
    assert segs == [None, "BBBB", None, "DDDD"]


def test_parse_masked_errors():
    with pytest.raises(ValueError, match="placeholder"):
        parse_masked("AAAA<mask>", [0], 4)  # mask claimed at 0, found at 1
    with pytest.raises(ValueError, match="inconsistent"):
        parse_masked("AAA<mask>", [1], 4)
    with pytest.raises(ValueError, match="trailing"):
        # index 5 is beyond the frame, so the placeholder never gets consumed
        parse_masked("AAAABBBB<mask>", [5], 4)


# --- extraction -------------------------------------------------------------

def test_extract_leading_segment():
    got = extract(["WXYZEFGHIJKL"], "<mask>EFGHIJKL", {0}, 4, provider="p")
    assert got[0].candidates == ("WXYZ",)
    assert got[0].segment_index == 0
    assert got[0].provider == "p"


def test_extract_after_anchor():
    got = extract(["ABCDQRSTIJKL"], "ABCD<mask>IJKL", {1}, 4)
    assert got[1].candidates == ("QRST",)


def test_extract_mixed_runs():
    masked = mask_segments("AAAABBBBCCCCDDDDEEEE", {0, 3, 4}, 4)
    got = extract(["WWWWBBBBCCCCXXXXYYYY"], masked, {0, 3, 4}, 4)
    assert got[0].candidates == ("WWWW",)
    assert got[3].candidates == ("XXXX",)
    assert got[4].candidates == ("YYYY",)


def test_extract_order_of_error_set_is_irrelevant():
    masked = mask_segments("AAAABBBBCCCCDDDDEEEE", [4, 0, 3], 4)
    a = extract(["WWWWBBBBCCCCXXXXYYYY"], masked, [4, 0, 3], 4)
    b = extract(["WWWWBBBBCCCCXXXXYYYY"], masked, [0, 3, 4], 4)
    assert {i: c.candidates for i, c in a.items()} == \
           {i: c.candidates for i, c in b.items()}


def test_extract_skips_unusable_candidates():
    masked = "ABCD<mask>IJKL"
    # first has no anchor, second is too short, third works
    got = extract(["zzzz", "ABCDQ", "ABCDMNOPIJKL"], masked, {1}, 4)
    assert got[1].candidates == ("MNOP",)


def test_extract_empty_when_nothing_usable():
    assert extract(["zzzz"], "ABCD<mask>IJKL", {1}, 4) == {}


def test_mask_extract_round_trip_property():
    rng = np.random.default_rng(17)
    for _ in range(50):
        q = int(rng.integers(2, 9))
        segs = [f"{i:04d}" for i in range(q)]  # all distinct: anchors unique
        text = "".join(segs)
        k = int(rng.integers(1, q + 1))
        errs = set(rng.choice(q, size=k, replace=False).tolist())
        masked = mask_segments(text, errs, 4)
        got = extract([text], masked, errs, 4)
        assert set(got) == errs
        for i in errs:
            assert got[i].candidates == (segs[i],)


def test_extract_round_trip_with_repeated_anchor_text():
    # short anchors recur all over this sentence; when the candidate is the
    # clean original, carving must still land on the true positions
    text = "the cat and the dog and the cow sat on the mat.."
    l = 2
    q = len(text) // l
    rng = np.random.default_rng(23)
    sets = [{i} for i in range(q)]
    sets += [set(rng.choice(q, size=5, replace=False).tolist())
             for _ in range(20)]
    for errs in sets:
        masked = mask_segments(text, errs, l)
        got = extract([text], masked, errs, l)
        assert set(got) == errs
        for i in errs:
            assert got[i].candidates == (text[i * l:(i + 1) * l],)


def test_extract_cursor_skips_consumed_prefix():
    # the second run's anchor text also occurs before the scan position; the
    # carve must use the occurrence after the first run, not restart at 0
    masked = mask_segments("AAAAxxxxAAAAyyyy", [1, 3], 4)
    got = extract(["AAAAmmmmAAAAnnnn"], masked, [1, 3], 4)
    assert got[1].candidates == ("mmmm",)
    assert got[3].candidates == ("nnnn",)


def test_extract_failed_run_does_not_block_later_runs():
    masked = mask_segments("AAAABBBBCCCCDDDDEEEE", [1, 3], 4)
    got = extract(["zzzzmmmmCCCCnnnnEEEE"], masked, [1, 3], 4)
    assert 1 not in got
    assert got[3].candidates == ("nnnn",)


# --- request validation -----------------------------------------------------

def test_request_validation():
    with pytest.raises(ValueError):
        CorrectionRequest("guess", "x", (), 1, 1)
    with pytest.raises(ValueError):
        CorrectionRequest("correct", "x", (), 0, 1)
    with pytest.raises(ValueError):
        CorrectionRequest("correct", "x", (), 1, 0)
    with pytest.raises(ValueError):
        CorrectionRequest("fill", "x", (), 1, 1)


def test_request_to_wire():
    req = CorrectionRequest("fill", "a<mask>", (1,), 1, 3)
    assert req.to_wire(9) == {"id": 9, "mode": "fill", "text": "a<mask>",
                              "masked_indices": [1], "segment_len": 1,
                              "num_candidates": 3}


# --- identity provider -------------------------------------------------------

def test_identity_provider():
    prov = IdentityProvider()
    creq = CorrectionRequest("correct", "hello", (), 1, 1)
    assert prov.correct(creq) == "hello"
    freq = CorrectionRequest("fill", "AB<mask>", (1,), 2, 3)
    assert prov.fill(freq) == ["AB\x00\x00"] * 3


# --- dictionary provider -----------------------------------------------------

def _hamming(a: str, b: str) -> int:
    return sum(x != y for x, y in zip(a, b))


def test_dictionary_correct_exact_hit():
    prov = DictionaryProvider(["the cat sat.", "the dog ran!"])
    req = CorrectionRequest("correct", "the dog ran!", (), 4, 1)
    assert prov.correct(req) == "the dog ran!"


def test_dictionary_correct_matches_exhaustive_scan():
    corpus = ["the cat sat.", "the dog ran!", "a fox jumped", "hi"]
    prov = DictionaryProvider(corpus)
    rng = np.random.default_rng(3)
    letters = np.frombuffer(b"abcdefghij .!", dtype=np.uint8)
    for _ in range(40):
        text = "".join(chr(c) for c in rng.choice(letters, size=12))
        got = prov.correct(CorrectionRequest("correct", text, (), 4, 1))
        pool = [s + "\x00" * (12 - len(s)) for s in corpus if len(s) <= 12]
        best = min(pool, key=lambda s: (_hamming(s, text), pool.index(s)))
        assert got == best


def test_dictionary_correct_tie_goes_to_earlier_entry():
    prov = DictionaryProvider(["aaaa", "aaab"])
    # "aaac" is distance 1 from both
    req = CorrectionRequest("correct", "aaac", (), 4, 1)
    assert prov.correct(req) == "aaaa"


def test_dictionary_fill_exact_anchor_match():
    corpus = ["the cat sat.", "the dog ran!", "a fox jumped"]
    prov = DictionaryProvider(corpus)
    req = CorrectionRequest("fill", "the <mask>sat.", (1,), 4, 2)
    assert prov.fill(req) == ["the cat sat.", "the cat sat."]
    assert prov.stats["fill_exact"] == 1
    assert prov.stats["fill_padded"] == 1


def test_dictionary_fill_falls_back_to_nearest_anchor():
    corpus = ["the cat sat.", "the dog ran!", "a fox jumped"]
    prov = DictionaryProvider(corpus)
    req = CorrectionRequest("fill", "xxx <mask>sat.", (1,), 4, 3)
    got = prov.fill(req)
    # anchor distances: cat 3, dog 6, fox 8
    assert got == ["the cat sat.", "the dog ran!", "a fox jumped"]
    assert prov.stats["fill_nearest"] == 1


def test_dictionary_fill_rejects_unfittable_frame():
    prov = DictionaryProvider(["this sentence is much too long"])
    req = CorrectionRequest("fill", "<mask>ABCD", (0,), 4, 1)
    with pytest.raises(ProviderError):
        prov.fill(req)


def test_dictionary_requires_corpus():
    with pytest.raises(ValueError):
        DictionaryProvider([])


# --- ngram provider ----------------------------------------------------------

def test_ngram_hand_counted_probability():
    prov = NgramProvider(["aa", "ab"], order=2, smoothing=0.01)
    assert prov.alphabet == ["\x00", "a", "b"]
    # context "a" was seen twice; "aa" once. A=3.
    assert prov._log_prob("a", "a") == pytest.approx(math.log(1.01 / 2.03))
    assert prov._log_prob("a", "\x00") == pytest.approx(math.log(0.01 / 2.03))


def test_ngram_single_hole_is_argmax():
    prov = NgramProvider(["abcabcabc", "abcabcabd"], order=3, beam_width=50)
    req = CorrectionRequest("fill", "ab<mask>", (2,), 1, 1)
    got = prov.fill(req)[0]
    scores = {ch: prov._log_prob("ab", ch) for ch in prov.alphabet}
    assert got == "ab" + max(sorted(scores), key=scores.get)
    assert got == "abc"


def test_ngram_beam_matches_exhaustive_enumeration():
    prov = NgramProvider(["aab", "abb", "bab"], order=2, beam_width=200)
    req = CorrectionRequest("fill", "<mask><mask>b", (0, 1), 1, 5)
    got = prov.fill(req)
    ranked = sorted(
        ((prov._log_prob("\x02", c0) + prov._log_prob(c0, c1), c0 + c1 + "b")
         for c0 in prov.alphabet for c1 in prov.alphabet),
        key=lambda t: (-t[0], t[1]))
    assert got == [text for _, text in ranked[:5]]


def test_ngram_fill_shape_contract():
    corpus = ["the cat sat on the mat", "the dog sat on the rug"]
    prov = NgramProvider(corpus, order=4)
    # frame of q=6 four-char segments (sentence NUL-padded to 24)
    masked = "the <mask>sat on the mat\x00\x00"
    req = CorrectionRequest("fill", masked, (1,), 4, 6)
    got = prov.fill(req)
    assert len(got) == 6
    assert all(len(t) == 24 and MASK not in t for t in got)
    assert prov.correct(CorrectionRequest("correct", "zzz", (), 1, 1)) == "zzz"


def test_ngram_validates_construction():
    with pytest.raises(ValueError):
        NgramProvider([], order=4)
    with pytest.raises(ValueError):
        NgramProvider(["abc"], order=1)


# --- external process provider ----------------------------------------------

def test_external_round_trip():
    with ExternalProcessProvider(_stub("ok")) as prov:
        assert prov.name == "stub-ok"
        creq = CorrectionRequest("correct", "hello there", (), 4, 1)
        assert prov.correct(creq) == "hello there"
        freq = CorrectionRequest("fill", "ABCD<mask>", (1,), 4, 3)
        assert prov.fill(freq) == ["ABCDxxxx"] * 3


def test_external_bad_handshake():
    with pytest.raises(ProviderError, match="handshake"):
        ExternalProcessProvider(_stub("bad-handshake"))


def test_external_not_ready():
    with pytest.raises(ProviderError, match="not ready"):
        ExternalProcessProvider(_stub("not-ready"))


def test_external_wrong_id():
    with ExternalProcessProvider(_stub("wrong-id")) as prov:
        with pytest.raises(ProviderError, match="response id"):
            prov.correct(CorrectionRequest("correct", "x", (), 1, 1))


def test_external_error_response():
    with ExternalProcessProvider(_stub("error")) as prov:
        with pytest.raises(ProviderError, match="boom"):
            prov.correct(CorrectionRequest("correct", "x", (), 1, 1))


def test_external_wrong_candidate_count():
    with ExternalProcessProvider(_stub("wrong-count")) as prov:
        req = CorrectionRequest("fill", "<mask>", (0,), 1, 4)
        with pytest.raises(ProviderError, match="expected 4"):
            prov.fill(req)


def test_external_crash_after_handshake():
    prov = ExternalProcessProvider(_stub("crash"))
    try:
        with pytest.raises(ProviderError):
            prov.correct(CorrectionRequest("correct", "x", (), 1, 1))
    finally:
        prov.close()


def test_external_unlaunchable_command():
    with pytest.raises(ProviderError, match="cannot start"):
        ExternalProcessProvider(["/nonexistent/binary-xyz"])


# --- transcript replay --------------------------------------------------------

def _transcript_lines() -> list[str]:
    return (DATA / "transcript.jsonl").read_text().splitlines()


def test_replay_identity_passes():
    assert replay_transcript(IdentityProvider(), _transcript_lines()) == []


def test_replay_external_stub_passes():
    with ExternalProcessProvider(_stub("ok")) as prov:
        assert replay_transcript(prov, _transcript_lines()) == []


class _Misbehaving(CandidateProvider):
    name = "bad"

    def correct(self, request):
        return request.text

    def fill(self, request):
        return ["zz"]


def test_replay_reports_contract_violations():
    failures = replay_transcript(_Misbehaving(), _transcript_lines())
    assert any("outputs" in f for f in failures)
    assert any("lengths" in f for f in failures)
    # line numbers let a reader find the offending request
    assert all(f.startswith("line ") for f in failures)


class _Raising(CandidateProvider):
    name = "raising"

    def correct(self, request):
        raise ProviderError("no service")

    def fill(self, request):
        raise ProviderError("no service")


def test_replay_records_provider_errors():
    failures = replay_transcript(_Raising(), _transcript_lines())
    assert len(failures) == 4
    assert all("provider error" in f for f in failures)
