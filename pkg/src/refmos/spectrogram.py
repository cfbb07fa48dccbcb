"""Log-power gammatone (ERB-scale) spectrograms with 80 ms windows, 20 ms hop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioSignal
from .errors import InvalidRangeError, NonPositiveFrequencyError, SignalTooShortError

DEFAULT_WINDOW_S = 0.080
DEFAULT_HOP_S = 0.020

# Glasberg-Moore ERB parameterization.
_ERB_SCALE = 21.4
_ERB_COEF = 0.00437

# Bandwidth factor for a 4th-order gammatone: the filter whose squared
# magnitude is (1 + ((f-fc)/b)^2)^-4 has equivalent rectangular bandwidth
# b * 5*pi/16, so b = ERB * 16/(5*pi).
_GT_BW_FACTOR = 16.0 / (5.0 * np.pi)

DB_FLOOR_EPS = 1e-20  # added before log10, puts digital silence at -200 dB


def erb_rate(freq_hz) -> float:
    """Map frequency in Hz to the ERB-rate scale."""
    f = np.asarray(freq_hz, dtype=np.float64)
    if np.any(f <= 0):
        raise NonPositiveFrequencyError(f"frequency must be > 0, got {freq_hz}")
    out = _ERB_SCALE * np.log10(1.0 + _ERB_COEF * f)
    return float(out) if out.ndim == 0 else out


def erb_rate_to_hz(rate) -> float:
    """Inverse of erb_rate."""
    r = np.asarray(rate, dtype=np.float64)
    out = (10.0 ** (r / _ERB_SCALE) - 1.0) / _ERB_COEF
    return float(out) if out.ndim == 0 else out


def erb_bandwidth(freq_hz: float) -> float:
    """Equivalent rectangular bandwidth in Hz at a center frequency."""
    return 24.7 * (1.0 + _ERB_COEF * float(freq_hz))


def center_frequencies(n_bands: int, f_min: float, f_max: float) -> np.ndarray:
    """n_bands frequencies uniformly spaced on the ERB-rate scale.

    First element is f_min and last is f_max (up to round-trip error).
    """
    if n_bands < 2:
        raise InvalidRangeError(f"need at least 2 bands, got {n_bands}")
    if not (0.0 < f_min < f_max):
        raise InvalidRangeError(f"need 0 < f_min < f_max, got [{f_min}, {f_max}]")
    grid = np.linspace(erb_rate(f_min), erb_rate(f_max), n_bands)
    return erb_rate_to_hz(grid)


@dataclass(frozen=True)
class GammatoneSpectrogram:
    """Band x frame matrix of log-power in dB."""

    values: np.ndarray           # [n_bands, n_frames]
    center_freqs_hz: np.ndarray  # ascending, length n_bands
    window_s: float
    hop_s: float
    sample_rate_hz: int

    @property
    def n_bands(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def gammatone_fft_weights(bands: np.ndarray, n_fft: int, sample_rate_hz: int) -> np.ndarray:
    """Squared magnitude response of each band's filter on the rFFT bin grid.

    Each row is unit gain at its center frequency; bandwidth is 1 ERB.
    """
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate_hz)
    bands = np.asarray(bands, dtype=np.float64)
    bw = _GT_BW_FACTOR * 24.7 * (1.0 + _ERB_COEF * bands)
    u = (freqs[None, :] - bands[:, None]) / bw[:, None]
    return (1.0 + u * u) ** -4


def compute_spectrogram(
    signal: AudioSignal,
    bands: np.ndarray,
    window_s: float = DEFAULT_WINDOW_S,
    hop_s: float = DEFAULT_HOP_S,
) -> GammatoneSpectrogram:
    """Gammatone log-power spectrogram of a signal.

    Each 80 ms Hann-windowed frame is transformed to a power spectrum; per
    band, power is integrated under the squared gammatone magnitude response
    and converted to dB with a 1e-20 floor.
    """
    rate = signal.sample_rate_hz
    bands = np.asarray(bands, dtype=np.float64)
    if np.any(np.diff(bands) <= 0) or bands[-1] >= rate / 2:
        raise InvalidRangeError("bands must be ascending and below Nyquist")
    window = int(round(window_s * rate))
    hop = int(round(hop_s * rate))
    x = signal.samples
    if x.size < window:
        raise SignalTooShortError(
            f"signal has {x.size} samples; one window needs {window}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, window)[::hop]
    win = np.hanning(window)
    spectra = np.fft.rfft(frames * win, axis=1)
    power = spectra.real**2 + spectra.imag**2
    # one-sided power: double interior bins, normalize so a full-scale sine
    # at a bin center integrates to ~0.5 (-3 dB)
    scale = np.full(power.shape[1], 2.0)
    scale[0] = 1.0
    if window % 2 == 0:
        scale[-1] = 1.0
    power *= scale / win.sum() ** 2
    weights = gammatone_fft_weights(bands, window, rate)
    band_power = power @ weights.T
    values = 10.0 * np.log10(band_power.T + DB_FLOOR_EPS)
    return GammatoneSpectrogram(
        values=values,
        center_freqs_hz=bands,
        window_s=window_s,
        hop_s=hop_s,
        sample_rate_hz=rate,
    )
