import struct

import numpy as np
import pytest

from aqlab import AudioBuffer, AudioFormatError, read_wav, write_wav


def test_header_arithmetic(tmp_path, rng):
    buf = AudioBuffer(rng.uniform(-0.9, 0.9, (2, 48000)), 48000)
    path = tmp_path / "a.wav"
    write_wav(buf, path, 16)
    back = read_wav(path)
    assert back.num_samples == 48000
    assert back.num_channels == 2
    assert back.sample_rate == 48000


def test_float32_round_trip_bit_identical(tmp_path, rng):
    data = rng.uniform(-1, 1, (2, 4000)).astype(np.float32).astype(np.float64)
    buf = AudioBuffer(data, 44100)
    path = tmp_path / "f.wav"
    assert write_wav(buf, path, "float32") == 0
    assert np.array_equal(read_wav(path).data, data)


@pytest.mark.parametrize("bits,step", [(16, 2.0**-15), (24, 2.0**-23)])
def test_pcm_round_trip_within_quantization(tmp_path, rng, bits, step):
    data = rng.uniform(-0.99, 0.99, (1, 3000))
    path = tmp_path / "p.wav"
    write_wav(AudioBuffer(data, 48000), path, bits)
    back = read_wav(path)
    assert np.max(np.abs(back.data - data)) <= step


def test_zeros_round_trip(tmp_path):
    path = tmp_path / "z.wav"
    write_wav(AudioBuffer(np.zeros((1, 100)), 48000), path, 16)
    assert np.all(read_wav(path).data == 0.0)


def test_clipping_reported_and_full_scale(tmp_path):
    buf = AudioBuffer(np.array([[1.5, 0.0, -2.0]]), 48000)
    path = tmp_path / "c.wav"
    assert write_wav(buf, path, 16) == 2
    back = read_wav(path)
    assert back.channel(0)[0] == pytest.approx((2**15 - 1) / 2**15)
    assert back.channel(0)[2] == -1.0


def test_unsupported_bit_depth(tmp_path):
    with pytest.raises(AudioFormatError):
        write_wav(AudioBuffer(np.zeros(10), 48000), tmp_path / "x.wav", 8)


def _synthetic_wav(path, format_tag, bits, payload=b"\x00" * 8):
    fmt = struct.pack("<HHIIHH", format_tag, 1, 8000, 8000, 1, bits)
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    path.write_bytes(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)


def test_mulaw_rejected(tmp_path):
    path = tmp_path / "mulaw.wav"
    _synthetic_wav(path, 7, 8)  # mu-law format tag
    with pytest.raises(AudioFormatError):
        read_wav(path)


def test_truncated_data_rejected(tmp_path, rng):
    path = tmp_path / "t.wav"
    write_wav(AudioBuffer(rng.uniform(-1, 1, (1, 1000)), 48000), path, 16)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 100])
    with pytest.raises(OSError):
        read_wav(path)


def test_not_a_wav(tmp_path):
    path = tmp_path / "n.wav"
    path.write_bytes(b"hello world, definitely not audio")
    with pytest.raises(AudioFormatError):
        read_wav(path)
