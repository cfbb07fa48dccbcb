"""WAV decoding, mono downmix and reference/degraded pairing rules."""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DurationTooShortError,
    EmptyAudioError,
    MalformedFileError,
    SampleRateMismatchError,
    UnsupportedEncodingError,
    WrongModeRateError,
)

MODE_SAMPLE_RATES = {"speech": 16000, "audio": 48000}

# Pairing guidance: clips outside this duration window trigger a warning.
MIN_RECOMMENDED_S = 3.0
MAX_RECOMMENDED_S = 10.0

# Shortest usable input: one 24-frame patch of 80 ms windows at 20 ms hop.
_MIN_PATCH_S = 0.080 + 23 * 0.020

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class DurationWarning(UserWarning):
    """Clip duration is outside the recommended 3-10 s window."""


@dataclass(frozen=True)
class AudioSignal:
    """Mono signal with samples normalized to [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise EmptyAudioError("signal must be a non-empty 1-D sample array")
        if not np.isfinite(samples).all():
            raise ValueError("signal contains non-finite samples")
        if np.abs(samples).max() > 1.0:
            raise ValueError("samples exceed [-1, 1]")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def energy(self) -> float:
        return float(np.dot(self.samples, self.samples))


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload) for every chunk in a RIFF body."""
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        payload = data[pos + 8:pos + 8 + size]
        if len(payload) < size:
            raise MalformedFileError(
                f"chunk {cid!r} declares {size} bytes but only {len(payload)} present"
            )
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def _decode_samples(raw: bytes, fmt: int, bits: int) -> np.ndarray:
    if fmt == _WAVE_FORMAT_PCM:
        if bits == 16:
            ints = np.frombuffer(raw, dtype="<i2")
            return ints.astype(np.float64) / 32768.0
        if bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8)
            b = b[: (b.size // 3) * 3].reshape(-1, 3)
            vals = (
                b[:, 0].astype(np.int32)
                | (b[:, 1].astype(np.int32) << 8)
                | (b[:, 2].astype(np.int32) << 16)
            )
            vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
            return vals.astype(np.float64) / float(1 << 23)
        if bits == 32:
            ints = np.frombuffer(raw, dtype="<i4")
            return ints.astype(np.float64) / float(1 << 31)
        raise UnsupportedEncodingError(f"PCM with {bits} bits per sample is not supported")
    if fmt == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedEncodingError(f"float WAV must be 32-bit, got {bits}")
        vals = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        return np.clip(vals, -1.0, 1.0)
    raise UnsupportedEncodingError(f"unsupported WAV format tag 0x{fmt:04X}")


def load_wav(path) -> AudioSignal:
    """Decode a RIFF/WAVE file into a mono AudioSignal.

    Accepts PCM16/24/32 and IEEE float32. Integer formats are scaled by the
    format's max magnitude; multi-channel input is downmixed by arithmetic
    mean across channels.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedFileError(f"{path}: not a RIFF/WAVE file")

    fmt_payload = None
    data_payload = None
    for cid, payload in _read_chunks(data):
        if cid == b"fmt " and fmt_payload is None:
            fmt_payload = payload
        elif cid == b"data" and data_payload is None:
            data_payload = payload
    if fmt_payload is None or len(fmt_payload) < 16:
        raise MalformedFileError(f"{path}: missing or truncated fmt chunk")
    if data_payload is None:
        raise MalformedFileError(f"{path}: missing data chunk")

    fmt, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt_payload, 0)
    if fmt == _WAVE_FORMAT_EXTENSIBLE:
        if len(fmt_payload) < 26:
            raise MalformedFileError(f"{path}: truncated extensible fmt chunk")
        (fmt,) = struct.unpack_from("<H", fmt_payload, 24)  # GUID leads with format tag
    if channels < 1:
        raise MalformedFileError(f"{path}: zero channels")

    samples = _decode_samples(data_payload, fmt, bits)
    if channels > 1:
        frames = samples.size // channels
        samples = samples[: frames * channels].reshape(frames, channels).mean(axis=1)
    if samples.size == 0:
        raise EmptyAudioError(f"{path}: no samples")
    return AudioSignal(samples=samples, sample_rate_hz=rate)


def save_wav(path, signal: AudioSignal, encoding: str = "pcm16") -> None:
    """Write a mono WAV file in PCM16 or float32."""
    if encoding == "pcm16":
        fmt, bits = _WAVE_FORMAT_PCM, 16
        ints = np.clip(np.round(signal.samples * 32768.0), -32768, 32767).astype("<i2")
        payload = ints.tobytes()
    elif encoding == "float32":
        fmt, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
        payload = signal.samples.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    rate = signal.sample_rate_hz
    block = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, fmt, 1, rate, rate * block, block, bits,
        b"data", len(payload),
    )
    with open(path, "wb") as fh:
        fh.write(header + payload)


def duration_warnings(ref: AudioSignal, deg: AudioSignal) -> list:
    """Messages for clips outside the recommended 3-10 s window."""
    msgs = []
    for name, sig in (("reference", ref), ("degraded", deg)):
        d = sig.duration_s
        if d < MIN_RECOMMENDED_S:
            msgs.append(f"{name} is {d:.2f} s; durations under {MIN_RECOMMENDED_S:.0f} s "
                        "give unstable scores")
        elif d > MAX_RECOMMENDED_S:
            msgs.append(f"{name} is {d:.2f} s; durations over {MAX_RECOMMENDED_S:.0f} s "
                        "average out local degradations")
    return msgs


def prepare_pair(ref: AudioSignal, deg: AudioSignal, mode: str):
    """Validate a reference/degraded pair for the given mode.

    Returns the pair unchanged. No resampling and no level equalization are
    performed; mismatched rates are an error.
    """
    if mode not in MODE_SAMPLE_RATES:
        raise ValueError(f"mode must be 'speech' or 'audio', got {mode!r}")
    if ref.sample_rate_hz != deg.sample_rate_hz:
        raise SampleRateMismatchError(
            f"reference {ref.sample_rate_hz} Hz vs degraded {deg.sample_rate_hz} Hz"
        )
    required = MODE_SAMPLE_RATES[mode]
    if ref.sample_rate_hz != required:
        raise WrongModeRateError(
            f"{mode} mode requires {required} Hz, got {ref.sample_rate_hz} Hz"
        )
    min_samples = int(round(_MIN_PATCH_S * required))
    for name, sig in (("reference", ref), ("degraded", deg)):
        if sig.samples.size < min_samples:
            raise DurationTooShortError(
                f"{name} has {sig.samples.size} samples; need at least {min_samples} "
                f"({_MIN_PATCH_S:.2f} s) for one patch"
            )
    for msg in duration_warnings(ref, deg):
        warnings.warn(msg, DurationWarning, stacklevel=2)
    return ref, deg
