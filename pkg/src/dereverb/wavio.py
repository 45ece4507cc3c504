"""Minimal RIFF/WAVE reader and writer.

Supports mono 16-bit and 24-bit integer PCM and 32-bit IEEE float, which is
all the toolkit needs. Integer samples map to [-1, 1) by division by
2^(bits-1); writing maps back with rounding and clamping. Multi-channel
files are accepted on read: channel 0 is taken and a warning is issued.

A hand-rolled parser is used instead of the stdlib `wave` module because
`wave` cannot write IEEE-float files, and byte-exact deterministic output
is part of the pipeline contract.
"""

from __future__ import annotations

import struct
import warnings
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .signal_core import Signal

__all__ = ["read_wav", "write_wav"]

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3
_FORMAT_EXTENSIBLE = 0xFFFE


def _decode_frames(raw: bytes, fmt: int, bits: int, n_channels: int) -> np.ndarray:
    if fmt == _FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise ParameterError(f"only 32-bit float WAV is supported, got {bits}-bit")
        data = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    elif fmt == _FORMAT_PCM and bits == 16:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 2.0**15
    elif fmt == _FORMAT_PCM and bits == 24:
        triplets = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3)
        as_int = (
            triplets[:, 0].astype(np.int32)
            | (triplets[:, 1].astype(np.int32) << 8)
            | (triplets[:, 2].astype(np.int32) << 16)
        )
        as_int = np.where(as_int >= 2**23, as_int - 2**24, as_int)
        data = as_int.astype(np.float64) / 2.0**23
    else:
        raise ParameterError(
            f"unsupported WAV encoding: format tag {fmt}, {bits} bits per sample"
        )
    if n_channels > 1:
        data = data.reshape(-1, n_channels)[:, 0]
    return data


def read_wav(path) -> Signal:
    """Read a WAV file as a mono float signal."""
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise ParameterError(f"{path}: not a RIFF/WAVE file")

    fmt_chunk = None
    data_chunk = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            fmt_chunk = body
        elif chunk_id == b"data":
            data_chunk = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt_chunk is None or data_chunk is None:
        raise ParameterError(f"{path}: missing fmt or data chunk")

    fmt_tag, n_channels, sample_rate, _, block_align, bits = struct.unpack_from(
        "<HHIIHH", fmt_chunk, 0
    )
    if fmt_tag == _FORMAT_EXTENSIBLE:
        if len(fmt_chunk) < 26:
            raise ParameterError(f"{path}: truncated extensible fmt chunk")
        (fmt_tag,) = struct.unpack_from("<H", fmt_chunk, 24)
    if n_channels < 1:
        raise ParameterError(f"{path}: channel count {n_channels} is invalid")
    if n_channels > 1:
        warnings.warn(
            f"{path}: {n_channels} channels found, using channel 0 only", stacklevel=2
        )

    usable = len(data_chunk) - len(data_chunk) % block_align if block_align else len(data_chunk)
    samples = _decode_frames(data_chunk[:usable], fmt_tag, bits, n_channels)
    if len(samples) == 0:
        raise ParameterError(f"{path}: no audio frames")
    return Signal(samples, float(sample_rate))


def _encode_samples(samples: np.ndarray, encoding: str) -> tuple[bytes, int, int]:
    """Return (payload, format_tag, bits_per_sample)."""
    if encoding == "float32":
        return samples.astype("<f4").tobytes(), _FORMAT_IEEE_FLOAT, 32
    if encoding == "pcm16":
        scaled = np.clip(np.round(samples * 2.0**15), -(2.0**15), 2.0**15 - 1)
        return scaled.astype("<i2").tobytes(), _FORMAT_PCM, 16
    if encoding == "pcm24":
        scaled = np.clip(np.round(samples * 2.0**23), -(2.0**23), 2.0**23 - 1)
        as_int = scaled.astype(np.int32)
        as_uint = np.where(as_int < 0, as_int + 2**24, as_int).astype(np.uint32)
        triplets = np.empty((len(as_uint), 3), dtype=np.uint8)
        triplets[:, 0] = as_uint & 0xFF
        triplets[:, 1] = (as_uint >> 8) & 0xFF
        triplets[:, 2] = (as_uint >> 16) & 0xFF
        return triplets.tobytes(), _FORMAT_PCM, 24
    raise ParameterError(f"unknown WAV encoding {encoding!r}")


def write_wav(path, s: Signal, encoding: str = "float32") -> None:
    """Write a mono signal as WAV. `encoding` is float32, pcm16 or pcm24."""
    if float(s.sample_rate) != int(s.sample_rate):
        raise ParameterError(
            f"WAV files require an integer sample rate, got {s.sample_rate}"
        )
    payload, fmt_tag, bits = _encode_samples(s.samples, encoding)
    rate = int(s.sample_rate)
    block_align = bits // 8
    byte_rate = rate * block_align

    chunks = [b"WAVE"]
    chunks.append(
        b"fmt " + struct.pack("<IHHIIHH", 16, fmt_tag, 1, rate, byte_rate, block_align, bits)
    )
    if fmt_tag == _FORMAT_IEEE_FLOAT:
        # 'fact' chunk with the frame count is required for non-PCM formats.
        chunks.append(b"fact" + struct.pack("<II", 4, len(s.samples)))
    if len(payload) % 2:
        chunks.append(b"data" + struct.pack("<I", len(payload)) + payload + b"\x00")
    else:
        chunks.append(b"data" + struct.pack("<I", len(payload)) + payload)

    body = b"".join(chunks)
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
