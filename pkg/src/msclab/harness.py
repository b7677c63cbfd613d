"""Experiment harness: JSON-configured Monte Carlo runs over sentences.

Every (SNR, sentence) pair gets its own RNG derived counter-style from the
master seed, so results are independent of execution order and worker count;
repeating a run with the same config and seed reproduces the output CSV byte
for byte (disable timing measurement via ``record_timings: false`` when you
need that property, since wall-clock means are not reproducible).

The CSV header is fixed:
config_hash,stage,snr_db,bler,bler_ci_lo,bler_ci_hi,bleu,rouge_l,frames,
time_ms_mean,provider,code_source.  A JSON sidecar next to the CSV embeds
the fully resolved configuration.
"""
from __future__ import annotations

import hashlib
import json
import time as _time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import wilson_interval
from .bp import LdpcCode, bp_decode, load_alist
from .channel import transmit_codeword
from .gf2 import nullspace
from .gf2codes import (LinearCode, MotherCodeSchedule, encode,
                       extended_hamming_8_4, load_generator_text, random_code,
                       split_schedule)
from .harq import run_crc_harq, run_sharq
from .metrics import ScoreRow, bleu, rouge_l
from .pipeline import PipelineConfig, decode_sentence, make_channels
from .semantic import (CandidateProvider, DictionaryProvider,
                       ExternalProcessProvider, IdentityProvider,
                       NgramProvider)
from .textcodec import from_bits, load_corpus, reassemble, segment

CSV_HEADER = ("config_hash,stage,snr_db,bler,bler_ci_lo,bler_ci_hi,bleu,"
              "rouge_l,frames,time_ms_mean,provider,code_source")

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["master_seed", "snr_db", "num_sentences", "q", "code",
                 "provider", "corpus", "output"],
    "additionalProperties": False,
    "properties": {
        "master_seed": {"type": "integer", "minimum": 0},
        "snr_db": {"type": "array", "items": {"type": "number"},
                   "minItems": 1},
        "num_sentences": {"type": "integer", "minimum": 1},
        "q": {"type": "integer", "minimum": 1},
        "code": {
            "type": "object",
            "required": ["family", "osd_order"],
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["random", "file", "hamming8_4"]},
                "n": {"type": "integer", "minimum": 2},
                "k": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "path": {"type": ["string", "null"]},
                "osd_order": {"type": "integer", "minimum": 0},
            },
        },
        "provider": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["identity", "dictionary", "ngram",
                                  "external"]},
                "corpus": {"type": ["string", "null"]},
                "command": {"type": ["string", "null"]},
                "order": {"type": "integer", "minimum": 2},
                "smoothing": {"type": "number", "exclusiveMinimum": 0},
                "beam_width": {"type": "integer", "minimum": 1},
            },
        },
        "corpus": {"type": "string"},
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_sec": {"type": "number", "minimum": 0},
                "t_harq": {"type": "number", "minimum": 0},
            },
        },
        "num_candidates": {"type": "integer", "minimum": 1},
        "harq": {
            "type": ["object", "null"],
            "required": ["mother", "budget_bits", "policy"],
            "additionalProperties": False,
            "properties": {
                "mother": {
                    "type": "object",
                    "required": ["family"],
                    "additionalProperties": False,
                    "properties": {
                        "family": {"enum": ["random", "file"]},
                        "n": {"type": "integer", "minimum": 2},
                        "k": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer", "minimum": 0},
                        "path": {"type": ["string", "null"]},
                    },
                },
                "round_split": {"type": "integer", "minimum": 1},
                "budget_bits": {"type": "integer", "minimum": 0},
                "policy": {"enum": ["confidence", "random", "crc"]},
                "max_rounds": {"type": "integer", "minimum": 1, "maximum": 2},
                "crc_spec": {"enum": ["crc8", "crc16-ccitt"]},
            },
        },
        "lc": {
            "type": ["object", "null"],
            "required": ["alist"],
            "additionalProperties": False,
            "properties": {
                "alist": {"type": "string"},
                "max_iterations": {"type": "integer", "minimum": 1},
            },
        },
        "output": {"type": "string"},
        "record_timings": {"type": "boolean"},
        "workers": {"type": "integer", "minimum": 1},
    },
}

_DEFAULTS = {
    "thresholds": {"t_sec": 0.001, "t_harq": 0.1},
    "num_candidates": 20,
    "harq": None,
    "lc": None,
    "record_timings": True,
    "workers": 1,
}


def validate_config(doc: dict) -> list[str]:
    """Schema plus cross-field checks; returns a list of problems."""
    import jsonschema

    problems = []
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.path)):
        loc = "/".join(str(p) for p in err.path) or "<root>"
        problems.append(f"{loc}: {err.message}")
    if problems:
        return problems
    code = doc["code"]
    if code["family"] == "random" and not ("n" in code and "k" in code):
        problems.append("code: random family needs n and k")
    if code["family"] == "file" and not code.get("path"):
        problems.append("code: file family needs path")
    provider = doc["provider"]
    if provider["kind"] in ("dictionary", "ngram") and not provider.get("corpus"):
        problems.append(f"provider: {provider['kind']} needs a corpus")
    if provider["kind"] == "external" and not provider.get("command"):
        problems.append("provider: external needs a command")
    harq = doc.get("harq")
    if harq:
        mother = harq["mother"]
        if mother["family"] == "random" and not ("n" in mother and "k" in mother):
            problems.append("harq: random mother needs n and k")
        if mother["family"] == "file" and not mother.get("path"):
            problems.append("harq: file mother needs path")
        if harq["policy"] == "crc" and not harq.get("crc_spec"):
            problems.append("harq: crc policy needs crc_spec")
    return problems


def resolve_config(doc: dict) -> dict:
    """Apply defaults and normalize; raises ValueError on invalid configs."""
    problems = validate_config(doc)
    if problems:
        raise ValueError("invalid config: " + "; ".join(problems))
    out = json.loads(json.dumps(doc))  # deep copy
    for key, val in _DEFAULTS.items():
        out.setdefault(key, json.loads(json.dumps(val)))
    for key, val in _DEFAULTS["thresholds"].items():
        out["thresholds"].setdefault(key, val)
    if out["harq"]:
        out["harq"].setdefault("max_rounds", 2)
        out["harq"].setdefault("round_split",
                               out["harq"]["mother"].get("n", 0) // 2)
        out["harq"].setdefault("crc_spec", None)
        out["harq"]["mother"].setdefault("seed", 0)
        out["harq"]["mother"].setdefault("path", None)
    out["code"].setdefault("seed", 0)
    out["code"].setdefault("path", None)
    if out["lc"]:
        out["lc"].setdefault("max_iterations", 50)
    return out


def config_hash(resolved: dict) -> str:
    """Hash of the experiment's identity: everything except fields that only
    steer execution (worker count) or say where results land (output path)."""
    ident = {k: v for k, v in resolved.items()
             if k not in ("workers", "output")}
    canon = json.dumps(ident, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_code(spec: dict) -> LinearCode:
    fam = spec["family"]
    if fam == "hamming8_4":
        return extended_hamming_8_4()
    if fam == "random":
        return random_code(spec["n"], spec["k"], spec.get("seed", 0))
    if fam == "file":
        text = Path(spec["path"]).read_text()
        return load_generator_text(text, source=f"file:{spec['path']}")
    raise ValueError(f"unknown code family {fam!r}")


def make_provider(spec: dict) -> CandidateProvider:
    kind = spec["kind"]
    if kind == "identity":
        return IdentityProvider()
    if kind == "dictionary":
        return DictionaryProvider(load_corpus(spec["corpus"]))
    if kind == "ngram":
        return NgramProvider(load_corpus(spec["corpus"]),
                             order=spec.get("order", 4),
                             smoothing=spec.get("smoothing", 0.01),
                             beam_width=spec.get("beam_width", 24))
    if kind == "external":
        return ExternalProcessProvider(spec["command"])
    raise ValueError(f"unknown provider kind {kind!r}")


def make_schedule(harq_spec: dict) -> MotherCodeSchedule:
    mother = load_code(harq_spec["mother"])
    return split_schedule(mother, harq_spec["round_split"])


class _RunContext:
    """Per-process bundle of everything a sentence simulation needs."""

    def __init__(self, resolved: dict):
        self.cfg = resolved
        self.corpus = load_corpus(resolved["corpus"])
        self.provider = make_provider(resolved["provider"])
        self.q = resolved["q"]
        self.harq = resolved["harq"]
        if self.harq:
            self.schedule = make_schedule(self.harq)
            self.code = None
            k = self.schedule.mother.k
            declared = resolved["code"]
            if declared.get("k") not in (None, k):
                raise ValueError("code.k disagrees with the HARQ mother code")
        else:
            self.schedule = None
            self.code = load_code(resolved["code"])
            k = self.code.k
        if self.harq and self.harq["policy"] == "crc":
            from .gf2codes import CRC_SPECS
            k -= CRC_SPECS[self.harq["crc_spec"]][0]
        if k % 8:
            raise ValueError(f"segment payload of {k} bits cannot carry text")
        self.segment_len = k // 8
        self.pcfg = PipelineConfig(
            osd_order=resolved["code"]["osd_order"],
            t_sec=resolved["thresholds"]["t_sec"],
            num_candidates=resolved["num_candidates"],
        )
        self.lc = None
        if resolved["lc"]:
            self.lc = LdpcCode(
                load_alist(Path(resolved["lc"]["alist"]).read_text()).h,
                max_iterations=resolved["lc"]["max_iterations"])
            self.lc_gen = LinearCode(self.lc.n, self.lc.k,
                                     nullspace(self.lc.h),
                                     source=f"alist:{resolved['lc']['alist']}")

    def code_source(self, stage: str) -> str:
        if stage == "lc":
            return self.lc_gen.source
        if self.schedule is not None:
            return self.schedule.mother.source
        return self.code.source

    def sentence(self, index: int) -> str:
        return self.corpus[index % len(self.corpus)]


def _rng_for(master_seed: int, snr_index: int, sentence_index: int
             ) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, snr_index, sentence_index]))


def _score(stage: str, snr_db: float, idx: int, original: str, frame,
           padded_out: str, time_ms: float) -> ScoreRow:
    l = frame.segment_len
    stripped = reassemble(frame, [padded_out[i * l:(i + 1) * l]
                                  for i in range(frame.q)])
    return ScoreRow(
        stage=stage, snr_db=snr_db, sentence_index=idx,
        error=padded_out != frame.padded,
        bleu=bleu(stripped, original),
        rouge_l=rouge_l(stripped, original),
        time_ms=time_ms,
    )


def _lc_sentence_row(ctx: _RunContext, snr_db: float, idx: int,
                     original: str, frame, rng: np.random.Generator
                     ) -> ScoreRow:
    """Long-code baseline: the sentence's bits ride in as many LDPC blocks
    as needed; a block that fails to converge contributes its (possibly
    invalid) final hard decision projected onto the information set."""
    bits = np.concatenate(list(frame.segment_bits))
    klc = ctx.lc_gen.k
    pad = (-len(bits)) % klc
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    t0 = _time.perf_counter()
    decoded = []
    for lo in range(0, len(padded), klc):
        payload = padded[lo:lo + klc]
        cw = encode(ctx.lc_gen, payload)
        obs = transmit_codeword(cw, snr_db, rng)
        res = bp_decode(ctx.lc, obs)
        decoded.append(ctx.lc_gen.info_from_codeword(res.codeword))
    ms = (_time.perf_counter() - t0) * 1e3
    out_bits = np.concatenate(decoded)[: len(bits)]
    return _score("lc", snr_db, idx, original, frame, from_bits(out_bits), ms)


def _sentence_rows(ctx: _RunContext, snr_index: int, snr_db: float,
                   sentence_index: int) -> list[ScoreRow]:
    rng = _rng_for(ctx.cfg["master_seed"], snr_index, sentence_index)
    original = ctx.sentence(sentence_index)
    frame = segment(original, ctx.q, ctx.segment_len)
    rows: list[ScoreRow] = []
    if ctx.harq and ctx.harq["policy"] == "crc":
        t0 = _time.perf_counter()
        res = run_crc_harq(ctx.schedule, frame, ctx.harq["crc_spec"], snr_db,
                           ctx.harq["budget_bits"], ctx.pcfg.osd_order, rng)
        ms = (_time.perf_counter() - t0) * 1e3
        rows.append(_score("crc_harq", snr_db, sentence_index, original,
                           frame, res.final_text, ms))
    elif ctx.harq:
        t = ctx.cfg["thresholds"]
        t0 = _time.perf_counter()
        res = run_sharq(ctx.schedule, frame, ctx.provider, ctx.pcfg, snr_db,
                        t["t_harq"], ctx.harq["budget_bits"],
                        ctx.harq["policy"], rng,
                        max_rounds=ctx.harq["max_rounds"])
        ms = (_time.perf_counter() - t0) * 1e3
        p = res.round1
        rows.append(_score("msc", snr_db, sentence_index, original, frame,
                           p.msc_text, p.timings_ms["msc"]))
        rows.append(_score("sec", snr_db, sentence_index, original, frame,
                           p.sec_text,
                           p.timings_ms["msc"] + p.timings_ms["sec"]))
        rows.append(_score("sld", snr_db, sentence_index, original, frame,
                           p.sld_text, p.timings_ms["total"]))
        rows.append(_score("sharq", snr_db, sentence_index, original, frame,
                           res.final_text, ms))
    else:
        channels = make_channels(ctx.code, frame, snr_db, rng)
        p = decode_sentence(channels, ctx.provider, ctx.pcfg)
        rows.append(_score("msc", snr_db, sentence_index, original, frame,
                           p.msc_text, p.timings_ms["msc"]))
        rows.append(_score("sec", snr_db, sentence_index, original, frame,
                           p.sec_text,
                           p.timings_ms["msc"] + p.timings_ms["sec"]))
        rows.append(_score("sld", snr_db, sentence_index, original, frame,
                           p.sld_text, p.timings_ms["total"]))
    if ctx.lc is not None:
        rows.append(_lc_sentence_row(ctx, snr_db, sentence_index, original,
                                     frame, rng))
    if not ctx.cfg["record_timings"]:
        rows = [ScoreRow(r.stage, r.snr_db, r.sentence_index, r.error,
                         r.bleu, r.rouge_l, 0.0) for r in rows]
    return rows


def _chunk_worker(resolved_json: str, snr_index: int, snr_db: float,
                  indices: list[int]) -> tuple[str, list[tuple]]:
    ctx = _RunContext(json.loads(resolved_json))
    out = []
    try:
        for idx in indices:
            for row in _sentence_rows(ctx, snr_index, snr_db, idx):
                out.append((row.stage, row.snr_db, row.sentence_index,
                            row.error, row.bleu, row.rouge_l, row.time_ms))
    finally:
        ctx.provider.close()
    return ctx.provider.name, out


def run_experiment(resolved: dict, workers: int | None = None
                   ) -> tuple[list[ScoreRow], str]:
    """Execute every (SNR, sentence) cell.

    Returns (rows, provider_name) with rows sorted by snr index, sentence
    index, then stage name; the ordering and values do not depend on the
    worker count.
    """
    workers = resolved["workers"] if workers is None else workers
    n = resolved["num_sentences"]
    all_rows: list[ScoreRow] = []
    payload = json.dumps(resolved)
    provider_name = resolved["provider"]["kind"]
    for snr_index, snr_db in enumerate(resolved["snr_db"]):
        if workers <= 1:
            provider_name, raw = _chunk_worker(payload, snr_index, snr_db,
                                               list(range(n)))
        else:
            size = -(-n // workers)
            chunks = [list(range(lo, min(lo + size, n)))
                      for lo in range(0, n, size)]
            raw = []
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_chunk_worker, payload, snr_index,
                                       snr_db, chunk) for chunk in chunks]
                for fut in futures:
                    provider_name, part = fut.result()
                    raw.extend(part)
        raw.sort(key=lambda r: (r[2], r[0]))
        all_rows.extend(ScoreRow(*r) for r in raw)
    return all_rows, provider_name


_STAGE_ORDER = {"msc": 0, "sec": 1, "sld": 2, "sharq": 3, "crc_harq": 4,
                "lc": 5}


def aggregate(rows: list[ScoreRow]) -> list[dict]:
    """Collapse per-sentence rows into per-(stage, snr) summary records."""
    groups: dict[tuple[str, float], list[ScoreRow]] = {}
    for r in rows:
        groups.setdefault((r.stage, r.snr_db), []).append(r)
    out = []
    for (stage, snr_db) in sorted(groups,
                                  key=lambda g: (g[1],
                                                 _STAGE_ORDER.get(g[0], 9))):
        rs = groups[(stage, snr_db)]
        errs = sum(r.error for r in rs)
        lo, hi = wilson_interval(errs, len(rs))
        out.append({
            "stage": stage,
            "snr_db": snr_db,
            "bler": errs / len(rs),
            "bler_ci_lo": lo,
            "bler_ci_hi": hi,
            "bleu": sum(r.bleu for r in rs) / len(rs),
            "rouge_l": sum(r.rouge_l for r in rs) / len(rs),
            "frames": len(rs),
            "time_ms_mean": sum(r.time_ms for r in rs) / len(rs),
        })
    return out


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _code_labels(resolved: dict) -> dict[str, str]:
    """code_source label per stage, without touching providers."""
    labels: dict[str, str] = {}
    if resolved["harq"]:
        mother = load_code(resolved["harq"]["mother"])
        base = mother.source
    else:
        base = load_code(resolved["code"]).source
    for stage in ("msc", "sec", "sld", "sharq", "crc_harq"):
        labels[stage] = base
    if resolved["lc"]:
        labels["lc"] = f"alist:{resolved['lc']['alist']}"
    return labels


def emit(resolved: dict, summaries: list[dict], out_path: str | Path,
         provider_name: str) -> tuple[Path, Path]:
    """Write the summary CSV and its JSON sidecar; returns both paths."""
    chash = config_hash(resolved)
    labels = _code_labels(resolved)
    lines = [CSV_HEADER]
    for s in summaries:
        lines.append(",".join([
            chash, s["stage"], _fmt(s["snr_db"]), _fmt(s["bler"]),
            _fmt(s["bler_ci_lo"]), _fmt(s["bler_ci_hi"]), _fmt(s["bleu"]),
            _fmt(s["rouge_l"]), str(s["frames"]), _fmt(s["time_ms_mean"]),
            provider_name, labels.get(s["stage"], "unknown"),
        ]))
    out_path = Path(out_path)
    out_path.write_text("\n".join(lines) + "\n")
    sidecar = out_path.with_suffix(out_path.suffix + ".json")
    sidecar.write_text(json.dumps({
        "config": resolved,
        "config_hash": chash,
        "package_version": __version__,
        "provider": provider_name,
    }, indent=2, sort_keys=True) + "\n")
    return out_path, sidecar


def run_to_files(doc: dict, workers: int | None = None,
                 output: str | None = None) -> tuple[Path, Path]:
    resolved = resolve_config(doc)
    if output is not None:
        resolved["output"] = output
    rows, provider_name = run_experiment(resolved, workers=workers)
    return emit(resolved, aggregate(rows), resolved["output"], provider_name)
