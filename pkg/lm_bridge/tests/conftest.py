"""Bridge test fixtures: a smoke-scale checkpoint trained once per session,
plus the same checklist reporter the primary suite uses."""
import pathlib
import subprocess
import sys

import pytest

from _bridge_paths import CORPUS
from lm_bridge import finetune

_VERDICTS: list[str] = []


@pytest.fixture
def checklist():
    def record(name: str, ok: bool, detail: str = "") -> bool:
        verdict = "PASS" if ok else "FAIL"
        line = f"{name}: {verdict}" + (f"  ({detail})" if detail else "")
        _VERDICTS.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.section("bridge checklist")
    for line in _VERDICTS:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pairs_file(tmp_path_factory) -> pathlib.Path:
    """Corrupted sentence pairs straight from the primary's CLI."""
    out = tmp_path_factory.mktemp("bridge") / "pairs.jsonl"
    cmd = [sys.executable, "-m", "msclab.cli", "corrupt",
           "--corpus", str(CORPUS), "--count", "500", "--snr-db", "2",
           "--seed", "1", "--output", str(out)]
    subprocess.run(cmd, check=True)
    return out


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory, pairs_file) -> pathlib.Path:
    """A smoke-scale model: enough training to speak fluent protocol,
    no claim about text quality."""
    out = tmp_path_factory.mktemp("bridge_model") / "repair.pt"
    rc = finetune.main(["--pairs", str(pairs_file), "--out", str(out),
                        "--epochs", "4", "--seed", "1"])
    assert rc == 0
    return out


@pytest.fixture(scope="session")
def bridge_argv(checkpoint) -> list[str]:
    return [sys.executable, "-m", "lm_bridge.serve",
            "--checkpoint", str(checkpoint)]
