import numpy as np
import pytest

from aqlab import AudioBuffer, write_wav
from aqlab.errors import ManifestError, ValidationError
from aqlab.manifest import StimulusIndex, condition_filename, read_batch_manifest
from aqlab.metrics import measure_batch
from aqlab.params import ProcessingMethod


def test_condition_filenames():
    assert condition_filename("MIX1", "reference") == "MIX1__ref.wav"
    assert condition_filename("MIX1", "anchor35") == "MIX1__anchor35.wav"
    assert condition_filename("MIX1", "Q3", ProcessingMethod.SH) == "MIX1__SH__Q3.wav"
    with pytest.raises(ValidationError):
        condition_filename("MIX1", "Q3")
    with pytest.raises(ValidationError):
        condition_filename("MIX1", "Q9", ProcessingMethod.SH)


def test_read_batch_manifest(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("item_id,path,methods\nA,audio/a.wav,LP;SH\nB,/abs/b.wav,DE\n")
    entries = read_batch_manifest(path)
    assert entries[0].item_id == "A"
    assert entries[0].methods == (ProcessingMethod.LP, ProcessingMethod.SH)
    assert entries[0].path == tmp_path / "audio/a.wav"  # relative to the manifest
    assert str(entries[1].path) == "/abs/b.wav"


@pytest.mark.parametrize("row", [
    "A__B,a.wav,LP",       # double underscore collides with the naming scheme
    "A,a.wav,XX",          # unknown method
    "A,a.wav,",            # no methods
])
def test_read_batch_manifest_rejects(tmp_path, row):
    path = tmp_path / "m.csv"
    path.write_text(f"item_id,path,methods\n{row}\n")
    with pytest.raises(ValidationError):
        read_batch_manifest(path)


def test_read_batch_manifest_duplicate_item(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("item_id,path,methods\nA,a.wav,LP\nA,b.wav,SH\n")
    with pytest.raises(ValidationError):
        read_batch_manifest(path)


def _make_stimuli(tmp_path, rng, items_methods):
    for item, methods in items_methods.items():
        buf = AudioBuffer(rng.uniform(-0.2, 0.2, (1, 48000)), 48000)
        for cond in ("reference", "anchor35", "anchor70"):
            write_wav(buf, tmp_path / condition_filename(item, cond), "float32")
        for m in methods:
            for q in ("Q1", "Q2", "Q3", "Q4", "Q5"):
                noisy = AudioBuffer(buf.data + rng.normal(0, 0.01, buf.data.shape), 48000)
                write_wav(noisy, tmp_path / condition_filename(item, q, ProcessingMethod(m)),
                          "float32")
    return StimulusIndex.from_directory(tmp_path)


def test_index_scan_and_completeness(tmp_path, rng):
    index = _make_stimuli(tmp_path, rng, {"A": ["LP"]})
    assert index.items == ["A"]
    assert ("A", ProcessingMethod.LP) in index.pairs
    assert index.missing_files() == []
    (tmp_path / "A__LP__Q2.wav").unlink()
    rescanned = StimulusIndex.from_directory(tmp_path)
    assert rescanned.missing_files() == ["A__LP__Q2.wav"]


def test_index_condition_path_errors(tmp_path, rng):
    index = _make_stimuli(tmp_path, rng, {"A": ["LP"]})
    with pytest.raises(ManifestError):
        index.condition_path("B", ProcessingMethod.LP, "reference")
    with pytest.raises(ManifestError):
        index.condition_path("A", ProcessingMethod.SH, "Q1")


def test_measure_batch_eight_scores_per_pair(tmp_path, rng):
    index = _make_stimuli(tmp_path, rng, {"A": ["LP"]})
    scores = measure_batch(index, "si_sdr")
    assert len(scores) == 8
    by_condition = {s.condition: s.value for s in scores}
    assert by_condition["reference"] == 120.0  # self-comparison saturates
    assert scores == measure_batch(index, "si_sdr")  # deterministic re-run


def test_measure_batch_missing_reference(tmp_path, rng):
    _make_stimuli(tmp_path, rng, {"A": ["LP"]})
    (tmp_path / "A__ref.wav").unlink()
    with pytest.raises(ManifestError):
        measure_batch(tmp_path, "nmr")
