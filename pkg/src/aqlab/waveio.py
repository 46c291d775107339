"""RIFF/WAVE file I/O for PCM16, PCM24, and float32, mono or stereo.

The stdlib ``wave`` module cannot read IEEE-float files and scipy cannot
write 24-bit PCM, so the small amount of RIFF plumbing lives here. Samples
are exchanged with :class:`~aqlab.buffer.AudioBuffer` in [-1, 1]; writing
clips out-of-range samples and reports how many were clipped.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .buffer import AudioBuffer
from .errors import AudioFormatError

__all__ = ["read_wav", "write_wav"]

_FORMAT_PCM = 0x0001
_FORMAT_IEEE_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a WAV file into an AudioBuffer.

    Supports PCM 16/24-bit and 32-bit float, 1 or 2 channels. Integer
    samples are scaled by 2**(bits-1) so full scale maps to [-1, 1).
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (size,) = struct.unpack("<I", raw[pos + 4:pos + 8])
        body = raw[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            if len(body) < size:
                raise OSError(f"{path}: truncated data chunk ({len(body)} of {size} bytes)")
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or len(fmt) < 16:
        raise AudioFormatError(f"{path}: missing fmt chunk")
    if data is None:
        raise OSError(f"{path}: missing data chunk")

    tag, channels, sample_rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == _FORMAT_EXTENSIBLE:
        if len(fmt) < 26:
            raise AudioFormatError(f"{path}: malformed extensible fmt chunk")
        (tag,) = struct.unpack("<H", fmt[24:26])  # first bytes of the subformat GUID
    if channels not in (1, 2):
        raise AudioFormatError(f"{path}: unsupported channel count {channels}")

    if tag == _FORMAT_PCM and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 2.0**15
    elif tag == _FORMAT_PCM and bits == 24:
        if len(data) % 3:
            raise OSError(f"{path}: truncated 24-bit sample data")
        b = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
        ints = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        samples = ints.astype(np.float64) / 2.0**23
    elif tag == _FORMAT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise AudioFormatError(f"{path}: unsupported encoding (format tag {tag}, {bits} bit)")

    if samples.size % channels:
        raise OSError(f"{path}: sample count not divisible by channel count")
    frames = samples.reshape(-1, channels).T
    return AudioBuffer(frames, sample_rate)


def write_wav(buffer: AudioBuffer, path: str | Path, bit_depth: int | str = "float32") -> int:
    """Write an AudioBuffer to a WAV file, returning the clip count.

    ``bit_depth`` is 16, 24, or "float32". Samples outside [-1, 1] are
    clipped before encoding and counted in the return value.
    """
    interleaved = buffer.data.T.reshape(-1)
    clip_count = int(np.count_nonzero((interleaved < -1.0) | (interleaved > 1.0)))
    clipped = np.clip(interleaved, -1.0, 1.0)

    if bit_depth == 16:
        scale = 2.0**15
        ints = np.clip(np.rint(clipped * scale), -scale, scale - 1).astype("<i2")
        payload = ints.tobytes()
        tag, bits = _FORMAT_PCM, 16
    elif bit_depth == 24:
        scale = 2.0**23
        ints = np.clip(np.rint(clipped * scale), -scale, scale - 1).astype(np.int32)
        as_u32 = ints.astype("<u4").view(np.uint8).reshape(-1, 4)
        payload = as_u32[:, :3].tobytes()
        tag, bits = _FORMAT_PCM, 24
    elif bit_depth == "float32":
        payload = clipped.astype("<f4").tobytes()
        tag, bits = _FORMAT_IEEE_FLOAT, 32
    else:
        raise AudioFormatError(f"unsupported bit depth {bit_depth!r} (use 16, 24, or 'float32')")

    channels = buffer.num_channels
    block_align = channels * bits // 8
    byte_rate = buffer.sample_rate * block_align
    fmt = struct.pack("<HHIIHH", tag, channels, buffer.sample_rate, byte_rate, block_align, bits)

    chunks = [b"fmt ", struct.pack("<I", len(fmt)), fmt]
    if tag == _FORMAT_IEEE_FLOAT:
        chunks += [b"fact", struct.pack("<II", 4, buffer.num_samples)]
    chunks += [b"data", struct.pack("<I", len(payload)), payload]
    if len(payload) & 1:
        chunks.append(b"\x00")
    body = b"".join(chunks)

    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)
    return clip_count
