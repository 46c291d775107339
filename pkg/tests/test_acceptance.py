"""Acceptance suite: one test per release criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the conftest hook prints
one PASS/FAIL line per criterion. Everything here runs without the
browser frontend. The dataset-dependent check is skipped unless
``AQLAB_ODAQ_SCORES`` points at the published subjective score files.
"""

import filecmp
import os
import time
from pathlib import Path

import numpy as np
import pytest
from mpmath import mp

from aqlab import (
    AudioBuffer,
    PeParams,
    ProcessingMethod,
    QualityLevel,
    ShParams,
    apply_pe,
    apply_sh,
    generate_condition,
    integrated_loudness,
    ms_decode,
    ms_encode,
    params_for,
    write_wav,
)
from aqlab.bench import benchmark
from aqlab.cli import EXIT_OK, main
from aqlab.manifest import CONDITIONS, QUALITY_CONDITIONS
from aqlab.metrics import MetricScore, nmr, si_sdr
from aqlab.scores import Cohort, ScoreRecord, load_column_mapping, load_scores, post_screen
from aqlab.stats import fisher_aggregate, mean_ci, pearson

from .conftest import pink_noise, quantize_float32

mp.dps = 50
SR = 48000


def _stopwatch(budget_s: float):
    start = time.monotonic()

    def check():
        elapsed = time.monotonic() - start
        assert elapsed < budget_s, f"criterion exceeded its {budget_s}s budget ({elapsed:.1f}s)"

    return check


# --------------------------------------------------------------------------
# Criterion 1: preset-table fidelity (exact match, < 1 s)

PRESET_TABLE = {
    "LP": {"Q1": 5000.0, "Q2": 9000.0, "Q3": 10500.0, "Q4": 12000.0, "Q5": 15000.0},
    "TM": {"Q1": 3000.0, "Q2": 5000.0, "Q3": 7000.0, "Q4": 9000.0, "Q5": 10500.0},
    "UN": {"Q1": 3000.0, "Q2": 5000.0, "Q3": 7000.0, "Q4": 9000.0, "Q5": 10500.0},
    "SH": {"Q1": 0.70, "Q2": 0.50, "Q3": 0.30, "Q4": 0.20, "Q5": 0.10},
    "PE": {"Q1": (10.0, 4096), "Q2": (10.0, 2048), "Q3": (10.0, 1024),
           "Q4": (16.0, 2048), "Q5": (16.0, 1024)},
}


def test_acceptance_preset_table_fidelity():
    done = _stopwatch(1.0)
    for method, level_values in PRESET_TABLE.items():
        for level, expected in level_values.items():
            params = params_for(ProcessingMethod(method), QualityLevel(level))
            if method == "LP":
                assert params.cutoff_hz == expected
            elif method in ("TM", "UN"):
                assert params.crossover_hz == expected
            elif method == "SH":
                assert params.hole_prob == expected
            else:
                assert (params.nmr_db, params.block_length) == expected
    done()


# --------------------------------------------------------------------------
# Criterion 2: loudness closure over 20 synthetic fixtures (< 1 min)

LOUDNESS_CELLS = [
    ("LP", "Q1"), ("LP", "Q3"), ("LP", "Q4"), ("LP", "Q5"),
    ("TM", "Q1"), ("TM", "Q2"), ("TM", "Q4"), ("TM", "Q5"),
    ("UN", "Q1"), ("UN", "Q2"), ("UN", "Q3"), ("UN", "Q5"),
    ("SH", "Q1"), ("SH", "Q2"), ("SH", "Q4"), ("SH", "Q5"),
    ("PE", "Q1"), ("PE", "Q2"), ("PE", "Q3"), ("PE", "Q4"),
]


def test_acceptance_loudness_closure():
    done = _stopwatch(60.0)
    rng = np.random.default_rng(0xC10)
    fixtures = [
        AudioBuffer(quantize_float32(pink_noise(rng, 3 * SR, channels=2)), SR)
        for _ in range(4)
    ]
    assert len(LOUDNESS_CELLS) == 20
    for i, (method, level) in enumerate(LOUDNESS_CELLS):
        fixture = fixtures[i % len(fixtures)]
        out = generate_condition(
            fixture, ProcessingMethod(method), QualityLevel(level), seed=31
        )
        lufs = integrated_loudness(out)
        tolerance = 1.0 if (method == "SH" and level == "Q1") else 0.1
        assert abs(lufs + 23.0) < tolerance, f"{method} {level}: {lufs:.3f} LUFS"
    done()


# --------------------------------------------------------------------------
# Criterion 3: MS identity and phantom-center exactness (< 10 s)

def test_acceptance_ms_identity_and_phantom_center():
    done = _stopwatch(10.0)
    rng = np.random.default_rng(0xC11)
    stereo = AudioBuffer(quantize_float32(rng.uniform(-0.5, 0.5, (2, 2 * SR))), SR)
    assert np.array_equal(ms_decode(*ms_encode(stereo)).data, stereo.data)

    x = quantize_float32(pink_noise(rng, 3 * SR, channels=1))[0]
    same = AudioBuffer(np.stack([x, x]), SR)
    sh_out = apply_sh(same, ShParams(hole_prob=0.5, seed=5))
    assert np.array_equal(sh_out.channel(0), sh_out.channel(1))
    pe_out = apply_pe(same, PeParams(nmr_db=16.0, block_length=2048, seed=5))
    assert np.array_equal(pe_out.channel(0), pe_out.channel(1))
    done()


# --------------------------------------------------------------------------
# Criterion 4: PE/NMR closure and pre-echo extent (< 2 min)

def test_acceptance_pe_nmr_closure_and_pre_echo():
    done = _stopwatch(120.0)
    rng = np.random.default_rng(0xC12)
    pink = AudioBuffer(quantize_float32(pink_noise(rng, 6 * SR, channels=1)), SR)
    for target, block in ((10.0, 4096), (10.0, 2048), (10.0, 1024),
                          (16.0, 2048), (16.0, 1024)):
        out = apply_pe(pink, PeParams(nmr_db=target, block_length=block, seed=3))
        measured = nmr(pink, out)
        assert abs(measured - target) <= 1.0, (
            f"NMR {target} at block {block}: measured {measured:.2f}"
        )

    # castanet-like click train: pre-onset noise energy grows with block length
    n = 5 * SR
    x = np.zeros(n)
    onsets = [int((0.5 + 0.5 * i) * SR) + 173 for i in range(8)]
    for q in onsets:
        x[q:q + 96] = 0.7 * rng.uniform(-1, 1, 96)
    clicks = AudioBuffer(x, SR)
    window = int(0.020 * SR)
    for target in (10.0, 16.0):
        energies = []
        for block in (1024, 2048, 4096):
            out = apply_pe(clicks, PeParams(nmr_db=target, block_length=block, seed=5))
            noise = out.channel(0) - x
            energies.append(sum(float(np.sum(noise[q - window:q] ** 2)) for q in onsets))
        assert energies[0] < energies[1] < energies[2], (
            f"pre-echo energies not increasing at NMR {target}: {energies}"
        )
    done()


# --------------------------------------------------------------------------
# Criterion 5: spectral-hole statistics (< 1 min)

def test_acceptance_sh_statistics():
    done = _stopwatch(60.0)
    rng = np.random.default_rng(0xC13)
    noise = AudioBuffer(quantize_float32(rng.uniform(-0.5, 0.5, 60 * SR)), SR)
    for p in (0.1, 0.5, 0.7):
        out, stats = apply_sh(noise, ShParams(hole_prob=p, seed=17), collect_stats=True)
        half_width = 2.576 * np.sqrt(p * (1 - p) / stats.total_tiles)
        assert abs(stats.fraction - p) < half_width, (
            f"hole fraction {stats.fraction:.4f} outside 99% CI of {p}"
        )
        assert np.sum(out.data**2) < np.sum(noise.data**2)
    done()


# --------------------------------------------------------------------------
# Criterion 6: SI-SDR closed-form sweep (< 10 s)

def test_acceptance_si_sdr_oracle_sweep():
    done = _stopwatch(10.0)
    rng = np.random.default_rng(0xC14)
    ref = rng.standard_normal(SR)
    w = rng.standard_normal(SR)
    w -= (np.dot(w, ref) / np.dot(ref, ref)) * ref
    for target_db in np.linspace(3.0, 30.0, 10):
        scale = np.sqrt(np.dot(ref, ref) / np.dot(w, w)) * 10 ** (-target_db / 20)
        est = ref + scale * w
        measured = si_sdr(AudioBuffer(ref, SR), AudioBuffer(est, SR))
        assert abs(measured - target_db) < 0.01
    done()


# --------------------------------------------------------------------------
# Criterion 7: statistics oracles (< 10 s)

def test_acceptance_statistics_oracles():
    done = _stopwatch(10.0)
    rng = np.random.default_rng(0xC15)
    for _ in range(100):
        n = int(rng.integers(3, 30))
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        mx, my = mp.fsum(x) / n, mp.fsum(y) / n
        sxy = mp.fsum((mp.mpf(a) - mx) * (mp.mpf(b) - my) for a, b in zip(x, y))
        sxx = mp.fsum((mp.mpf(a) - mx) ** 2 for a in x)
        syy = mp.fsum((mp.mpf(b) - my) ** 2 for b in y)
        assert pearson(x, y) == pytest.approx(float(sxy / mp.sqrt(sxx * syy)), abs=1e-9)

        rs = rng.uniform(-0.99, 0.99, int(rng.integers(1, 7)))
        expected = float(mp.tanh(mp.fsum(mp.atanh(mp.mpf(r)) for r in rs) / len(rs)))
        assert fisher_aggregate(rs) == pytest.approx(expected, abs=1e-9)

    # reference pair: the 50-digit oracle gives 0.766077 (the value
    # 0.76594 quoted alongside this criterion does not satisfy
    # tanh(mean(atanh)) and is recorded as a defect in the decision log)
    oracle = float(mp.tanh((mp.atanh(mp.mpf("0.9")) + mp.atanh(mp.mpf("0.5"))) / 2))
    assert fisher_aggregate([0.9, 0.5]) == pytest.approx(oracle, abs=1e-4)
    done()


# --------------------------------------------------------------------------
# Criterion 8: benchmark pipeline property (< 10 s)

@pytest.mark.filterwarnings("ignore:saturated correlation")
def test_acceptance_benchmark_affine_property():
    done = _stopwatch(10.0)
    records = []
    for m_i, method in enumerate(ProcessingMethod):
        for item in ("I1", "I2"):
            for q_i, condition in enumerate(QUALITY_CONDITIONS):
                for l_i, listener in enumerate(("L1", "L2", "L3")):
                    score = 10.0 + 7.0 * q_i + 3.0 * m_i + (item == "I2") + 0.25 * l_i
                    records.append(ScoreRecord(listener, Cohort.A, 1, 1, item,
                                               method, condition, score))
                records.append(ScoreRecord("L1", Cohort.A, 1, 1, item, method,
                                           "reference", 100.0))
                records.append(ScoreRecord("L1", Cohort.A, 1, 1, item, method,
                                           "anchor35", 15.0))
                records.append(ScoreRecord("L1", Cohort.A, 1, 1, item, method,
                                           "anchor70", 35.0))

    means: dict[tuple, list] = {}
    for rec in records:
        means.setdefault((rec.item_id, rec.method, rec.condition), []).append(rec.score)
    metric = [
        MetricScore("affine", item, method, condition, 0.5 * float(np.mean(v)) - 4.0)
        for (item, method, condition), v in sorted(means.items())
    ]
    report = benchmark(metric, records)
    assert set(report.per_method_r) == {m.value for m in ProcessingMethod}
    for method, r in report.per_method_r.items():
        assert r == pytest.approx(1.0, abs=1e-9), method
    assert report.aggregated_r == pytest.approx(1.0, abs=1e-4)
    # anchor/reference rows were present in the inputs and never paired
    assert report.excluded_rows == 6 * 2 * 3
    assert sum(report.per_method_n.values()) == 6 * 2 * 5
    done()


# --------------------------------------------------------------------------
# Criterion 9: dataset-dependent check (runs only with the published scores)

@pytest.mark.skipif(
    "AQLAB_ODAQ_SCORES" not in os.environ,
    reason="published subjective score files not supplied (set AQLAB_ODAQ_SCORES)",
)
def test_acceptance_published_dataset_consistency(tmp_path):
    paths = [Path(p) for p in os.environ["AQLAB_ODAQ_SCORES"].split(os.pathsep)]
    mapping = None
    if "AQLAB_ODAQ_MAPPING" in os.environ:
        mapping = load_column_mapping(os.environ["AQLAB_ODAQ_MAPPING"])
    result = load_scores(paths, column_mapping=mapping)

    by_cohort: dict[str, set] = {}
    for rec in result.records:
        by_cohort.setdefault(rec.cohort.value, set()).add(rec.listener_id)
    assert len(by_cohort.get("A", set())) == 26
    assert len(by_cohort.get("B1", set())) == 8
    assert len(by_cohort.get("B2", set())) == 8

    screen = post_screen(result.records)
    stats = mean_ci(screen.kept, ("method", "condition"))
    table = {(s.key[0], s.key[1]): s.mean for s in stats}
    for method in ProcessingMethod:
        levels = [table[(method.value, q)] for q in QUALITY_CONDITIONS]
        assert all(a < b for a, b in zip(levels, levels[1:])), (
            f"{method.value}: means not strictly increasing {levels}"
        )

    # full report for manual comparison against the published figures
    out = tmp_path / "published_report"
    code = main(["report", "--scores"] + [str(p) for p in paths]
                + (["--mapping", os.environ["AQLAB_ODAQ_MAPPING"]] if mapping else [])
                + ["--out", str(out)])
    assert code == EXIT_OK
    print(f"descriptive report written to {out}")


# --------------------------------------------------------------------------
# Criterion 10: end-to-end determinism of cmd_generate (< 2 min)

def test_acceptance_generate_determinism(tmp_path):
    done = _stopwatch(120.0)
    rng = np.random.default_rng(0xC16)
    items_dir = tmp_path / "items"
    items_dir.mkdir()
    for name in ("one", "two"):
        buf = AudioBuffer(quantize_float32(pink_noise(rng, 2 * SR, channels=2)), SR)
        write_wav(buf, items_dir / f"{name}.wav", "float32")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(
        "item_id,path,methods\n"
        f"one,{items_dir / 'one.wav'},LP;SH\n"
        f"two,{items_dir / 'two.wav'},PE;UN\n"
    )
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["generate", "--manifest", str(manifest), "--out", str(out),
                     "--seed", "424242", "--jobs", "1"]) == EXIT_OK
        outputs.append(out)
    names = sorted(p.name for p in outputs[0].iterdir())
    assert names == sorted(p.name for p in outputs[1].iterdir())
    different = [n for n in names
                 if not filecmp.cmp(outputs[0] / n, outputs[1] / n, shallow=False)]
    assert different == [], f"non-deterministic outputs: {different}"
    done()


# --------------------------------------------------------------------------
# Secondary criterion (service side): slot-position blinding audit. The UI
# round trip lives in the frontend's own test suite.

def test_acceptance_secondary_blinding_audit():
    from scipy import stats as sps

    from aqlab.service import build_session
    from .test_service import _fake_index

    index = _fake_index({"M1": ["LP", "TM", "UN"],
                         "TR1": ["LP"], "TR2": ["LP"], "TR3": ["LP"]})
    counts = {c: np.zeros(8) for c in CONDITIONS}
    for k in range(1000):
        plan = build_session(index, f"L{k}", 2024, ["TR1", "TR2", "TR3"])
        for trial in plan.test_trials():
            for slot, condition in enumerate(trial.slot_conditions):
                counts[condition][slot] += 1
    for condition, observed in counts.items():
        chi2 = float(((observed - observed.mean()) ** 2 / observed.mean()).sum())
        p_value = 1.0 - sps.chi2.cdf(chi2, df=7)
        assert p_value > 0.01, f"slot distribution for {condition} rejects uniformity"
