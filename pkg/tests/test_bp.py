import numpy as np
import pytest

from msclab import gf2
from msclab.bp import AlistParseError, LdpcCode, bp_decode, dump_alist, load_alist
from msclab.channel import SoftObservation, modulate, snr_db_to_sigma2

from _paths import DATA, PKG_DATA

TOY = (DATA / "toy.alist").read_text()


def test_toy_alist_read_back():
    code = load_alist(TOY)
    assert (code.n, code.m, code.k) == (6, 3, 3)
    assert [nb.size for nb in code.col_neighbors] == [2, 2, 2, 1, 1, 1]
    assert [nb.size for nb in code.row_neighbors] == [3, 3, 3]
    expected_h = np.array([
        [1, 1, 0, 1, 0, 0],
        [0, 1, 1, 0, 1, 0],
        [1, 0, 1, 0, 0, 1],
    ], dtype=np.uint8)
    assert np.array_equal(code.h, expected_h)


def _patched(line_no: int, replacement: str) -> str:
    lines = TOY.splitlines()
    lines[line_no - 1] = replacement
    return "\n".join(lines) + "\n"


def test_alist_row_index_out_of_range():
    with pytest.raises(AlistParseError) as exc:
        load_alist(_patched(5, "1 9"))
    assert exc.value.line == 5
    assert "out of range" in str(exc.value)


def test_alist_column_index_out_of_range():
    with pytest.raises(AlistParseError) as exc:
        load_alist(_patched(12, "2 3 7"))
    assert exc.value.line == 12


def test_alist_degree_mismatch():
    with pytest.raises(AlistParseError) as exc:
        load_alist(_patched(5, "1 0"))
    assert exc.value.line == 5
    assert "degree" in str(exc.value)


def test_alist_row_column_disagreement():
    # row 1 claims column 5, but column 5's own list says row 2 only
    with pytest.raises(AlistParseError) as exc:
        load_alist(_patched(11, "1 2 5"))
    assert exc.value.line == 11
    assert "disagree" in str(exc.value)


def test_alist_non_integer_and_truncation():
    with pytest.raises(AlistParseError) as exc:
        load_alist(_patched(2, "2 x"))
    assert exc.value.line == 2
    with pytest.raises(AlistParseError) as exc:
        load_alist("\n".join(TOY.splitlines()[:7]) + "\n")
    assert "end of file" in str(exc.value)


def test_dump_is_canonical_fixed_point():
    code = load_alist(TOY)
    canon = dump_alist(code)
    assert canon == TOY
    assert dump_alist(load_alist(canon)) == canon


def test_dump_round_trip_on_packaged_code():
    code = load_alist((PKG_DATA / "ldpc_96_48.alist").read_text())
    assert (code.n, code.m) == (96, 48)
    canon = dump_alist(code)
    again = load_alist(canon)
    assert np.array_equal(again.h, code.h)
    assert dump_alist(again) == canon


@pytest.fixture(scope="module")
def code96():
    return load_alist((PKG_DATA / "ldpc_96_48.alist").read_text())


def _random_codeword(code: LdpcCode, rng: np.random.Generator) -> np.ndarray:
    basis = gf2.nullspace(code.h)
    coeffs = rng.integers(0, 2, size=basis.shape[0]).astype(np.uint8)
    return gf2.matmul(coeffs, basis)


def test_noiseless_converges_in_one_iteration(code96):
    cw = _random_codeword(code96, np.random.default_rng(7))
    obs = SoftObservation(modulate(cw), 1.0)
    res = bp_decode(code96, obs)
    assert res.converged
    assert res.iterations_used == 1
    assert np.array_equal(res.codeword, cw)


def test_every_single_flip_is_corrected(code96):
    clean = modulate(np.zeros(code96.n, dtype=np.uint8))
    for j in range(code96.n):
        values = clean.copy()
        values[j] = -1.0
        res = bp_decode(code96, SoftObservation(values, 0.5), max_iterations=20)
        assert res.converged, f"flip at {j} not recovered"
        assert not res.codeword.any()


def test_converged_implies_zero_syndrome(code96):
    rng = np.random.default_rng(21)
    hits = 0
    for _ in range(60):
        cw = _random_codeword(code96, rng)
        y = modulate(cw) + rng.normal(0.0, 1.0, size=code96.n)
        res = bp_decode(code96, SoftObservation(y, 1.0), max_iterations=15)
        if res.converged:
            hits += 1
            assert not code96.syndrome(res.codeword).any()
    assert hits > 0  # the claim above must actually have been exercised


def test_punctured_positions_enter_with_zero_llr():
    code = load_alist(TOY)
    values = np.array([1.0, 1.0, 0.0, 1.0, 1.0, 0.0])
    res = bp_decode(code, SoftObservation(values, 1.0), max_iterations=10)
    assert res.converged
    assert not res.codeword.any()


def test_bler_non_increasing_with_snr(code96):
    # common-randomness: one unit-variance noise draw per frame, rescaled
    # per SNR, so the three operating points see nested perturbations
    rng = np.random.default_rng(11)
    frames = 200
    noise = rng.normal(0.0, 1.0, size=(frames, code96.n))
    clean = modulate(np.zeros(code96.n, dtype=np.uint8))
    blers = []
    for snr_db in (0.0, 2.0, 4.0):
        sigma2 = snr_db_to_sigma2(snr_db)
        errs = 0
        for f in range(frames):
            obs = SoftObservation(clean + np.sqrt(sigma2) * noise[f], sigma2)
            res = bp_decode(code96, obs, max_iterations=30)
            errs += res.codeword.any()
        blers.append(errs / frames)
    assert blers[0] >= blers[1] >= blers[2]
    assert blers[0] > blers[2]  # the sweep spans a genuine waterfall


def test_length_mismatch_rejected(code96):
    with pytest.raises(ValueError):
        bp_decode(code96, SoftObservation(np.ones(10), 1.0))
