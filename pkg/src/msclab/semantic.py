"""Semantic candidate providers and mask/extract plumbing.

A provider answers two kinds of requests about sentence text:

* ``correct``: propose a cleaned-up version of (possibly corrupted) text.
* ``fill``: given text in which unreliable segments were replaced by the
  literal placeholder ``<mask>``, propose ``num_candidates`` complete
  sentences, best first.

Native providers: identity (no knowledge), a closed-corpus dictionary, and a
character 4-gram beam-search model.  External models speak newline-delimited
JSON over stdio through ExternalProcessProvider; one request per line, the
response carries the same id:

    {"id": 7, "mode": "fill", "text": "...", "masked_indices": [2],
     "segment_len": 4, "num_candidates": 20}
    {"id": 7, "outputs": ["...", ...], "error": null}

A serving process announces itself first with {"ready": true, "provider":
name}.  Segment indices on the wire are 0-based.
"""
from __future__ import annotations

import json
import shlex
import subprocess
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

MASK = "<mask>"
_SENTINEL = "\x02"


class ProviderError(RuntimeError):
    """A provider failed to produce usable output."""


@dataclass(frozen=True)
class CorrectionRequest:
    mode: str
    text: str
    masked_indices: tuple[int, ...]
    segment_len: int
    num_candidates: int

    def __post_init__(self):
        if self.mode not in ("correct", "fill"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.segment_len < 1:
            raise ValueError("segment_len must be >= 1")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")
        if self.mode == "fill" and not self.masked_indices:
            raise ValueError("fill requests need at least one masked segment")

    def to_wire(self, request_id: int) -> dict:
        return {
            "id": request_id,
            "mode": self.mode,
            "text": self.text,
            "masked_indices": list(self.masked_indices),
            "segment_len": self.segment_len,
            "num_candidates": self.num_candidates,
        }


@dataclass(frozen=True)
class CandidateSet:
    """Ordered candidate texts for one segment, best first."""

    segment_index: int
    candidates: tuple[str, ...]
    provider: str = ""


def mask_segments(sentence_text: str, error_set, segment_len: int) -> str:
    """Replace each flagged segment of a padded sentence by ``<mask>``;
    consecutive flagged segments yield consecutive placeholders."""
    if len(sentence_text) % segment_len:
        raise ValueError("text length is not a multiple of segment_len")
    q = len(sentence_text) // segment_len
    bad = set(int(i) for i in error_set)
    if bad and (min(bad) < 0 or max(bad) >= q):
        raise ValueError("error set index out of range")
    parts = []
    for i in range(q):
        if i in bad:
            parts.append(MASK)
        else:
            parts.append(sentence_text[i * segment_len:(i + 1) * segment_len])
    return "".join(parts)


def parse_masked(masked_text: str, masked_indices, segment_len: int) -> list[str | None]:
    """Recover the per-segment view of a masked sentence: anchor text for
    intact segments, None for masked ones."""
    bad = sorted(set(int(i) for i in masked_indices))
    q = (len(masked_text) - len(MASK) * len(bad)) // segment_len + len(bad)
    if q < 1 or (len(masked_text) - len(MASK) * len(bad)) % segment_len:
        raise ValueError("masked text length inconsistent with segment_len")
    segs: list[str | None] = []
    pos = 0
    for i in range(q):
        if i in bad:
            if masked_text[pos:pos + len(MASK)] != MASK:
                raise ValueError(f"expected placeholder at segment {i}")
            segs.append(None)
            pos += len(MASK)
        else:
            segs.append(masked_text[pos:pos + segment_len])
            pos += segment_len
    if pos != len(masked_text):
        raise ValueError("trailing characters after the last segment")
    return segs


def extract(candidates: list[str], masked_sentence: str, error_set,
            segment_len: int, provider: str = "") -> dict[int, CandidateSet]:
    """Carve per-segment replacement strings out of whole-sentence candidates.

    Each candidate is scanned once, left to right.  A run of consecutive
    masked segments starting at index 0 is carved from the candidate start;
    any other run is carved right after the intact text that precedes it
    (everything between the previous run and this one), located at its first
    occurrence at or after the scan position.  Anchoring on the whole intact
    gap rather than a lone short segment keeps a repeated bigram early in the
    sentence from dragging the carve to the wrong spot.  Candidates in which
    the anchor text is absent, or which are too short to supply every block,
    contribute nothing to the affected run (later runs are still attempted).
    Segments left without any candidate are simply absent from the result
    (the caller keeps its current text).
    """
    bad = sorted(set(int(i) for i in error_set))
    segs = parse_masked(masked_sentence, bad, segment_len)
    runs: list[list[int]] = []
    for i in bad:
        if runs and i == runs[-1][-1] + 1:
            runs[-1].append(i)
        else:
            runs.append([i])
    per_segment: dict[int, list[str]] = {i: [] for i in bad}
    for cand in candidates:
        cursor = 0
        prev_end = 0  # index one past the previous run's last segment
        for run in runs:
            first = run[0]
            if first == 0:
                start = 0
            else:
                gap = "".join(segs[j] for j in range(prev_end, first))
                pos = cand.find(gap, cursor)
                start = -1 if pos < 0 else pos + len(gap)
            prev_end = run[-1] + 1
            if start < 0 or start + len(run) * segment_len > len(cand):
                continue
            for t, seg_idx in enumerate(run):
                lo = start + t * segment_len
                per_segment[seg_idx].append(cand[lo:lo + segment_len])
            cursor = start + len(run) * segment_len
    return {
        i: CandidateSet(i, tuple(texts), provider)
        for i, texts in per_segment.items() if texts
    }


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

class CandidateProvider:
    """Interface stub; concrete providers define correct() and fill()."""

    name = "abstract"

    def correct(self, request: CorrectionRequest) -> str:
        raise NotImplementedError

    def fill(self, request: CorrectionRequest) -> list[str]:
        raise NotImplementedError

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class IdentityProvider(CandidateProvider):
    """Pass-through: correction returns the input; fill plugs NUL characters
    into the masked spans (it has nothing better to offer)."""

    name = "identity"

    def correct(self, request: CorrectionRequest) -> str:
        return request.text

    def fill(self, request: CorrectionRequest) -> list[str]:
        filled = request.text.replace(MASK, "\x00" * request.segment_len)
        return [filled] * request.num_candidates


def _pad_to(text: str, length: int) -> str | None:
    if len(text) > length:
        return None
    return text + "\x00" * (length - len(text))


class DictionaryProvider(CandidateProvider):
    """Closed-world corpus lookup.

    correct: the corpus sentence (NUL-padded to the request length) nearest
    to the input in character Hamming distance; ties go to the earlier corpus
    entry.  fill: corpus sentences whose intact segments match the request's
    anchors exactly, in corpus order; if none match, the corpus ranked by
    Hamming distance over the anchor characters.  Short candidate lists are
    padded by repeating the best entry, counted in ``stats``.
    """

    name = "dictionary"

    def __init__(self, corpus: list[str]):
        if not corpus:
            raise ValueError("empty corpus")
        self.corpus = list(corpus)
        self.stats = Counter()

    def _padded_corpus(self, length: int) -> list[tuple[int, str]]:
        out = []
        for idx, s in enumerate(self.corpus):
            p = _pad_to(s, length)
            if p is not None:
                out.append((idx, p))
        return out

    def correct(self, request: CorrectionRequest) -> str:
        pool = self._padded_corpus(len(request.text))
        if not pool:
            self.stats["correct_no_pool"] += 1
            return request.text
        text = np.frombuffer(request.text.encode("latin-1"), dtype=np.uint8)
        best_idx, best_d = 0, len(request.text) + 1
        for i, (_, cand) in enumerate(pool):
            arr = np.frombuffer(cand.encode("latin-1"), dtype=np.uint8)
            d = int((arr != text).sum())
            if d < best_d:
                best_idx, best_d = i, d
        self.stats["correct"] += 1
        return pool[best_idx][1]

    def fill(self, request: CorrectionRequest) -> list[str]:
        l = request.segment_len
        segs = parse_masked(request.text, request.masked_indices, l)
        q = len(segs)
        pool = self._padded_corpus(q * l)
        if not pool:
            raise ProviderError("no corpus sentence fits the frame length")
        anchor_idx = [i for i, s in enumerate(segs) if s is not None]
        anchor = "".join(segs[i] for i in anchor_idx)

        def anchors_of(text: str) -> str:
            return "".join(text[i * l:(i + 1) * l] for i in anchor_idx)

        exact = [text for _, text in pool if anchors_of(text) == anchor]
        if exact:
            ranked = exact
            self.stats["fill_exact"] += 1
        else:
            a = np.frombuffer(anchor.encode("latin-1"), dtype=np.uint8)
            scored = []
            for pos, (_, text) in enumerate(pool):
                b = np.frombuffer(anchors_of(text).encode("latin-1"), dtype=np.uint8)
                scored.append((int((a != b).sum()), pos, text))
            scored.sort(key=lambda t: (t[0], t[1]))
            ranked = [t[2] for t in scored]
            self.stats["fill_nearest"] += 1
        if len(ranked) < request.num_candidates:
            self.stats["fill_padded"] += 1
            ranked = ranked + [ranked[0]] * (request.num_candidates - len(ranked))
        return ranked[: request.num_candidates]


class NgramProvider(CandidateProvider):
    """Character n-gram model with additive smoothing and beam-search fill.

    The model is trained once on the corpus at construction.  fill() runs a
    beam (width >= num_candidates) left to right across the masked character
    positions, scoring each character by
    P(c | order-1 preceding chars) = (count + s) / (context_count + s * A)
    with A the alphabet size.  correct() returns the input unchanged: without
    masks this model has no opinion about which characters to distrust.
    """

    def __init__(self, corpus: list[str], order: int = 4,
                 smoothing: float = 0.01, beam_width: int = 24):
        if not corpus:
            raise ValueError("empty corpus")
        if order < 2:
            raise ValueError("order must be >= 2")
        self.order = int(order)
        self.name = f"ngram{self.order}"
        self.smoothing = float(smoothing)
        self.beam_width = int(beam_width)
        self.alphabet = sorted(set("".join(corpus)) | {"\x00"})
        self._grams = Counter()
        self._contexts = Counter()
        ctx = self.order - 1
        for line in corpus:
            padded = _SENTINEL * ctx + line
            for i in range(ctx, len(padded)):
                self._grams[padded[i - ctx:i + 1]] += 1
                self._contexts[padded[i - ctx:i]] += 1

    def _log_prob(self, context: str, char: str) -> float:
        a = len(self.alphabet)
        num = self._grams[context + char] + self.smoothing
        den = self._contexts[context] + self.smoothing * a
        return float(np.log(num / den))

    def correct(self, request: CorrectionRequest) -> str:
        return request.text

    def fill(self, request: CorrectionRequest) -> list[str]:
        l = request.segment_len
        segs = parse_masked(request.text, request.masked_indices, l)
        chars: list[str | None] = []
        for s in segs:
            chars.extend(list(s) if s is not None else [None] * l)
        holes = [i for i, c in enumerate(chars) if c is None]
        width = max(self.beam_width, request.num_candidates)
        ctx = self.order - 1
        beam: list[tuple[float, list[str]]] = [(0.0, [c or "" for c in chars])]
        for pos in holes:
            grown: list[tuple[float, list[str]]] = []
            for score, state in beam:
                left = _SENTINEL * ctx + "".join(state[:pos])
                context = left[-ctx:]
                for ch in self.alphabet:
                    nxt = list(state)
                    nxt[pos] = ch
                    grown.append((score + self._log_prob(context, ch), nxt))
            grown.sort(key=lambda t: (-t[0], "".join(t[1])))
            beam = grown[:width]
        outs = ["".join(state) for _, state in beam[: request.num_candidates]]
        while len(outs) < request.num_candidates:
            outs.append(outs[0])
        return outs


class ExternalProcessProvider(CandidateProvider):
    """Client for a provider subprocess speaking the NDJSON stdio protocol."""

    def __init__(self, command: str | list[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        except OSError as exc:
            raise ProviderError(f"cannot start provider: {exc}") from exc
        line = self._proc.stdout.readline()
        try:
            hello = json.loads(line)
        except (json.JSONDecodeError, TypeError):
            self.close()
            raise ProviderError(f"bad handshake line: {line!r}")
        if not hello.get("ready"):
            self.close()
            raise ProviderError(f"provider not ready: {hello!r}")
        self.name = str(hello.get("provider", "external"))
        self._next_id = 0

    def _call(self, request: CorrectionRequest) -> list[str]:
        if self._proc.poll() is not None:
            raise ProviderError("provider process has exited")
        self._next_id += 1
        rid = self._next_id
        try:
            self._proc.stdin.write(json.dumps(request.to_wire(rid)) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ProviderError(f"provider I/O failed: {exc}") from exc
        if not line:
            raise ProviderError("provider closed its stdout")
        try:
            resp = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProviderError(f"bad provider response: {line!r}") from exc
        if resp.get("id") != rid:
            raise ProviderError(f"response id {resp.get('id')} != request id {rid}")
        if resp.get("error"):
            raise ProviderError(f"provider error: {resp['error']}")
        outputs = resp.get("outputs")
        if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
            raise ProviderError("response outputs must be a list of strings")
        return outputs

    def correct(self, request: CorrectionRequest) -> str:
        outputs = self._call(request)
        if not outputs:
            raise ProviderError("correct returned no outputs")
        return outputs[0]

    def fill(self, request: CorrectionRequest) -> list[str]:
        outputs = self._call(request)
        if len(outputs) != request.num_candidates:
            raise ProviderError(
                f"fill returned {len(outputs)} outputs, "
                f"expected {request.num_candidates}")
        return outputs

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=5)
        except Exception:
            proc.kill()

    def __del__(self):
        self.close()


# ---------------------------------------------------------------------------
# Protocol conformance replay
# ---------------------------------------------------------------------------

def replay_transcript(provider: CandidateProvider, lines) -> list[str]:
    """Run recorded requests against a provider and check the structural
    contract of each response.

    Each transcript line is a JSON object: {"request": {mode, text,
    masked_indices, segment_len, num_candidates}, "expect": {...}} where
    expect may pin "outputs" (exact count), "output_len" (every output's
    length), and "no_placeholder" (outputs contain no <mask>).  Returns a
    list of human-readable failures; empty means the transcript passed.
    """
    failures: list[str] = []
    for lineno, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        entry = json.loads(raw)
        spec = entry["request"]
        req = CorrectionRequest(
            mode=spec["mode"],
            text=spec["text"],
            masked_indices=tuple(spec.get("masked_indices", ())),
            segment_len=spec["segment_len"],
            num_candidates=spec.get("num_candidates", 1),
        )
        expect = entry.get("expect", {})
        try:
            outputs = ([provider.correct(req)] if req.mode == "correct"
                       else provider.fill(req))
        except ProviderError as exc:
            failures.append(f"line {lineno}: provider error: {exc}")
            continue
        if "outputs" in expect and len(outputs) != expect["outputs"]:
            failures.append(f"line {lineno}: got {len(outputs)} outputs, "
                            f"expected {expect['outputs']}")
        if expect.get("no_placeholder") and any(MASK in o for o in outputs):
            failures.append(f"line {lineno}: output still contains {MASK!r}")
        if "output_len" in expect:
            want = expect["output_len"]
            bad = [len(o) for o in outputs if len(o) != want]
            if bad:
                failures.append(f"line {lineno}: output lengths {bad} != {want}")
    return failures
