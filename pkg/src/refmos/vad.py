"""Energy-based voice activity detection on the reference signal (speech mode)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioSignal
from .errors import SignalTooShortError
from .spectrogram import DEFAULT_HOP_S, DEFAULT_WINDOW_S

REL_RANGE_DB = 40.0     # voiced frames lie within this range of the loudest frame
ABS_FLOOR_DBFS = -70.0  # and above this absolute RMS level


@dataclass(frozen=True)
class VoiceActivityMask:
    """Per-frame voiced flags, frame-aligned with the gammatone spectrogram."""

    voiced: np.ndarray  # bool, length n_frames

    @property
    def n_frames(self) -> int:
        return self.voiced.size

    def voiced_fraction(self, start: int, n: int) -> float:
        return float(self.voiced[start:start + n].mean())


def voiced_frames(
    ref: AudioSignal,
    window_s: float = DEFAULT_WINDOW_S,
    hop_s: float = DEFAULT_HOP_S,
) -> VoiceActivityMask:
    """Mark frames whose RMS is within 40 dB of the loudest frame and above -70 dBFS.

    Runs on the reference only, with the same framing as the spectrogram, so
    degraded content never changes the mask.
    """
    rate = ref.sample_rate_hz
    window = int(round(window_s * rate))
    hop = int(round(hop_s * rate))
    x = ref.samples
    if x.size < window:
        raise SignalTooShortError(
            f"signal has {x.size} samples; one window needs {window}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, window)[::hop]
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    with np.errstate(divide="ignore"):
        rms_db = 20.0 * np.log10(rms)  # silence -> -inf, handled by the floor
    voiced = (rms_db >= rms_db.max() - REL_RANGE_DB) & (rms_db > ABS_FLOOR_DBFS)
    return VoiceActivityMask(voiced=voiced)
