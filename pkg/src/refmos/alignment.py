"""Global, patch-level and sample-level (fine) alignment of signal pairs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sp_signal

from .audio_io import AudioSignal
from .errors import NoPatchesError, ShapeMismatchError
from .similarity import ThresholdParams, nsim_map, threshold_values
from .spectrogram import GammatoneSpectrogram, compute_spectrogram
from .vad import VoiceActivityMask

DEFAULT_PATCH_FRAMES = 24   # ~0.48 s at 20 ms hop
DEFAULT_SEARCH_FRAMES = 30  # +-0.6 s patch search window
MIN_VOICED_FRACTION = 0.5


class DegenerateSignalWarning(UserWarning):
    """A signal had zero energy; alignment fell back to lag 0."""


@dataclass(frozen=True)
class Patch:
    """A block of consecutive spectrogram frames."""

    start_frame: int
    n_frames: int


@dataclass(frozen=True)
class PatchPair:
    """An aligned (reference, degraded) patch with its NSIM cell map."""

    ref_patch: Patch
    deg_patch: Patch
    frame_offset: int     # deg start - ref start
    sample_lag: int       # fine alignment shift, |lag| <= hop samples
    nsim_cells: np.ndarray

    def mean_nsim(self) -> float:
        return float(self.nsim_cells.mean())


def _xcorr_lag(a: np.ndarray, b: np.ndarray, max_lag: int | None = None) -> int:
    """Lag maximizing the cross-correlation of a against b.

    Positive lag means `a` starts later than `b`. The argmax is invariant
    under common gain scaling, so no per-lag normalization is applied.
    """
    corr = sp_signal.correlate(a, b, mode="full", method="fft")
    lags = np.arange(-(b.size - 1), a.size)
    if max_lag is not None:
        keep = np.abs(lags) <= max_lag
        corr = corr[keep]
        lags = lags[keep]
    return int(lags[np.argmax(corr)])


def global_align(ref: AudioSignal, deg: AudioSignal):
    """Align whole signals by their cross-correlation peak.

    Returns (ref', deg', lag_samples) where positive lag means the degraded
    signal starts later; the leading extra material is trimmed so both start
    at the correlation-optimal instant.
    """
    if ref.sample_rate_hz != deg.sample_rate_hz:
        raise ShapeMismatchError("sample rates differ")
    if ref.energy() == 0.0 or deg.energy() == 0.0:
        warnings.warn("zero-energy signal; skipping global alignment",
                      DegenerateSignalWarning, stacklevel=2)
        return ref, deg, 0
    lag = _xcorr_lag(deg.samples, ref.samples)
    if lag > 0:
        deg = AudioSignal(deg.samples[lag:], deg.sample_rate_hz)
    elif lag < 0:
        ref = AudioSignal(ref.samples[-lag:], ref.sample_rate_hz)
    return ref, deg, lag


def segment_patches(
    spec: GammatoneSpectrogram,
    patch_frames: int = DEFAULT_PATCH_FRAMES,
    mask: VoiceActivityMask | None = None,
) -> list[Patch]:
    """Non-overlapping patches tiling the reference spectrogram.

    With a VAD mask (speech mode), patches with under 50% voiced frames are
    dropped.
    """
    n_frames = spec.n_frames
    if n_frames < patch_frames:
        raise NoPatchesError(
            f"spectrogram has {n_frames} frames; one patch needs {patch_frames}"
        )
    patches = [
        Patch(start, patch_frames)
        for start in range(0, n_frames - patch_frames + 1, patch_frames)
    ]
    if mask is not None:
        patches = [
            p for p in patches
            if mask.voiced_fraction(p.start_frame, p.n_frames) >= MIN_VOICED_FRACTION
        ]
        if not patches:
            raise NoPatchesError("no patches with enough voiced reference frames")
    return patches


def _candidate_deltas(search_frames: int):
    yield 0
    for d in range(1, search_frames + 1):
        yield -d
        yield d


def align_patches(
    ref_patches: list[Patch],
    ref_spec: GammatoneSpectrogram,
    deg_spec: GammatoneSpectrogram,
    search_frames: int = DEFAULT_SEARCH_FRAMES,
    dynamic_range: float | None = None,
) -> list[PatchPair]:
    """Greedy left-to-right pairing of reference patches to degraded patches.

    Candidate degraded starts p+delta are scored by mean NSIM; ties resolve
    toward smaller |delta|, then negative delta. Chosen degraded starts are
    strictly increasing.
    """
    if ref_spec.n_bands != deg_spec.n_bands:
        raise ShapeMismatchError("spectrograms disagree on band count")
    if dynamic_range is None:
        dynamic_range = dynamic_range_of(ref_spec.values, deg_spec.values)
    max_start = deg_spec.n_frames - (ref_patches[0].n_frames if ref_patches else 0)
    pairs: list[PatchPair] = []
    prev_start = -1
    for patch in ref_patches:
        p, n = patch.start_frame, patch.n_frames
        ref_cells = ref_spec.values[:, p:p + n]
        best = None
        for delta in _candidate_deltas(search_frames):
            s = p + delta
            if s < 0 or s > max_start or s <= prev_start:
                continue
            cells = nsim_map(ref_cells, deg_spec.values[:, s:s + n], dynamic_range)
            score = cells.mean()
            if best is None or score > best[0]:
                best = (score, s, cells)
        if best is None:
            s = min(max(p, prev_start + 1), max_start)
            s = max(s, 0)
            cells = nsim_map(ref_cells, deg_spec.values[:, s:s + n], dynamic_range)
            best = (cells.mean(), s, cells)
        _, s, cells = best
        pairs.append(PatchPair(
            ref_patch=patch,
            deg_patch=Patch(s, n),
            frame_offset=s - p,
            sample_lag=0,
            nsim_cells=cells,
        ))
        prev_start = s
    return pairs


def dynamic_range_of(ref_values: np.ndarray, deg_values: np.ndarray) -> float:
    """Shared NSIM dynamic range: global max minus global min of the pair."""
    hi = max(ref_values.max(), deg_values.max())
    lo = min(ref_values.min(), deg_values.min())
    return float(hi - lo) if hi > lo else 1.0


def fine_align(
    pair: PatchPair,
    ref: AudioSignal,
    deg: AudioSignal,
    bands: np.ndarray,
    window_s: float,
    hop_s: float,
    thresholds: ThresholdParams | None,
    dynamic_range: float,
) -> PatchPair:
    """Sample-level alignment of one patch pair.

    The patch's time-domain segments are cross-correlated over +-hop samples;
    the degraded segment is shifted by the peak lag, spectrograms are
    recomputed and re-thresholded, and whichever NSIM map (pre- or
    post-shift) has the higher mean is kept. Never decreases mean NSIM.
    """
    rate = ref.sample_rate_hz
    window = int(round(window_s * rate))
    hop = int(round(hop_s * rate))
    seg_len = (pair.ref_patch.n_frames - 1) * hop + window

    ref_start = pair.ref_patch.start_frame * hop
    deg_start = pair.deg_patch.start_frame * hop
    ref_seg = ref.samples[ref_start:ref_start + seg_len]
    deg_seg = deg.samples[deg_start:deg_start + seg_len]
    if ref_seg.size < seg_len or deg_seg.size < seg_len:
        return pair
    if not (np.any(ref_seg) and np.any(deg_seg)):
        return pair

    lag = _xcorr_lag(deg_seg, ref_seg, max_lag=hop)
    new_start = int(np.clip(deg_start + lag, 0, deg.samples.size - seg_len))
    lag = new_start - deg_start
    if lag == 0:
        return pair

    shifted = deg.samples[new_start:new_start + seg_len]
    spec_r = compute_spectrogram(AudioSignal(ref_seg, rate), bands, window_s, hop_s)
    spec_d = compute_spectrogram(AudioSignal(shifted, rate), bands, window_s, hop_s)
    r_vals, d_vals = spec_r.values, spec_d.values
    if thresholds is not None:
        r_vals, d_vals = threshold_values(r_vals, d_vals, thresholds)
    cells = nsim_map(r_vals, d_vals, dynamic_range)
    if cells.mean() > pair.mean_nsim():
        return replace(pair, sample_lag=lag, nsim_cells=cells)
    return pair
