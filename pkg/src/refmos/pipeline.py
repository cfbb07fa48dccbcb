"""End-to-end comparison pipeline: align, analyze, threshold, score, map to MOS."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import alignment, similarity, vad
from .audio_io import AudioSignal, duration_warnings
from .errors import NoPatchesError
from .mos_mapping import (
    DEFAULT_SPEECH_MAPPING,
    PolynomialMapping,
    SvrModel,
    default_audio_model,
    polynomial_mos,
    svr_predict,
)
from .similarity import NsimResult, ThresholdParams
from .spectrogram import (
    DEFAULT_HOP_S,
    DEFAULT_WINDOW_S,
    center_frequencies,
    compute_spectrogram,
)

# Bumped whenever default settings or algorithm changes alter scores for the
# frozen golden fixture set.
CONFORMANCE_VERSION = 1

MODE_DEFAULTS = {
    "speech": dict(sample_rate_hz=16000, n_bands=21, f_min=50.0, f_max=8000.0 * 0.999,
                   use_vad=True, model="polynomial"),
    "audio": dict(sample_rate_hz=48000, n_bands=32, f_min=50.0, f_max=24000.0 * 0.999,
                  use_vad=False, model="svr"),
}


def conformance_version() -> int:
    return CONFORMANCE_VERSION


@dataclass(frozen=True)
class Config:
    """Pipeline settings; build with Config.speech() / Config.audio()."""

    mode: str
    sample_rate_hz: int
    n_bands: int
    f_min: float
    f_max: float
    use_vad: bool
    model: str  # "polynomial" | "svr"
    window_s: float = DEFAULT_WINDOW_S
    hop_s: float = DEFAULT_HOP_S
    patch_frames: int = alignment.DEFAULT_PATCH_FRAMES
    search_frames: int = alignment.DEFAULT_SEARCH_FRAMES
    thresholds: ThresholdParams | None = field(default_factory=ThresholdParams)
    svr_model: SvrModel | None = None  # None -> shipped default when model == "svr"
    polynomial: PolynomialMapping = DEFAULT_SPEECH_MAPPING
    workers: int = 1

    @classmethod
    def for_mode(cls, mode: str, **overrides) -> "Config":
        if mode not in MODE_DEFAULTS:
            raise ValueError(f"mode must be 'speech' or 'audio', got {mode!r}")
        settings = dict(MODE_DEFAULTS[mode])
        settings.update(overrides)
        return cls(mode=mode, **settings)

    @classmethod
    def speech(cls, **overrides) -> "Config":
        return cls.for_mode("speech", **overrides)

    @classmethod
    def audio(cls, **overrides) -> "Config":
        return cls.for_mode("audio", **overrides)


@dataclass(frozen=True)
class PatchDetail:
    """Per-patch diagnostics for verbose output."""

    ref_start_frame: int
    deg_start_frame: int
    frame_offset: int
    sample_lag: int
    nsim: float


@dataclass(frozen=True)
class QualityResult:
    """Full scoring result for one reference/degraded pair."""

    mos: float
    overall_nsim: float
    fvnsim: np.ndarray
    per_frame_nsim: np.ndarray
    per_patch: list
    center_freqs_hz: np.ndarray
    global_lag_samples: int
    conformance_version: int
    mode: str
    warnings: list


def _common_truncate(ref: AudioSignal, deg: AudioSignal):
    n = min(ref.samples.size, deg.samples.size)
    if ref.samples.size != n:
        ref = AudioSignal(ref.samples[:n], ref.sample_rate_hz)
    if deg.samples.size != n:
        deg = AudioSignal(deg.samples[:n], deg.sample_rate_hz)
    return ref, deg


def _map_mos(cfg: Config, nsim: NsimResult) -> float:
    if cfg.model == "svr":
        model = cfg.svr_model or default_audio_model()
        return svr_predict(nsim.fvnsim, model)
    if cfg.model == "polynomial":
        return polynomial_mos(nsim.overall, cfg.polynomial)
    raise ValueError(f"unknown model kind {cfg.model!r}")


def compare(ref: AudioSignal, deg: AudioSignal, cfg: Config) -> QualityResult:
    """Score a degraded signal against its clean reference.

    Deterministic: identical inputs and config give bit-identical results,
    independent of cfg.workers.
    """
    notes = list(duration_warnings(ref, deg))

    if ref.energy() == 0.0 or deg.energy() == 0.0:
        # degenerate input: skip alignment rather than hard-fail
        notes.append("zero-energy signal; skipped global alignment (lag 0)")
        ref_a, deg_a, lag = ref, deg, 0
    else:
        ref_a, deg_a, lag = alignment.global_align(ref, deg)
    ref_a, deg_a = _common_truncate(ref_a, deg_a)

    bands = center_frequencies(cfg.n_bands, cfg.f_min, cfg.f_max)
    ref_spec = compute_spectrogram(ref_a, bands, cfg.window_s, cfg.hop_s)
    deg_spec = compute_spectrogram(deg_a, bands, cfg.window_s, cfg.hop_s)
    if cfg.thresholds is not None:
        ref_spec, deg_spec = similarity.threshold_pair(ref_spec, deg_spec, cfg.thresholds)
    dyn_range = alignment.dynamic_range_of(ref_spec.values, deg_spec.values)

    mask = None
    if cfg.use_vad:
        mask = vad.voiced_frames(ref_a, cfg.window_s, cfg.hop_s)
    try:
        patches = alignment.segment_patches(ref_spec, cfg.patch_frames, mask)
    except NoPatchesError as exc:
        raise NoPatchesError(
            f"{exc} (mode={cfg.mode}, frames={ref_spec.n_frames}, "
            f"voiced={int(mask.voiced.sum()) if mask else 'n/a'})"
        ) from exc

    pairs = alignment.align_patches(
        patches, ref_spec, deg_spec, cfg.search_frames, dyn_range
    )

    def fine(pair):
        return alignment.fine_align(
            pair, ref_a, deg_a, bands, cfg.window_s, cfg.hop_s,
            cfg.thresholds, dyn_range,
        )

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            pairs = list(pool.map(fine, pairs))
    else:
        pairs = [fine(p) for p in pairs]

    nsim = similarity.aggregate_nsim(pairs)
    mos = _map_mos(cfg, nsim)

    detail = [
        PatchDetail(
            ref_start_frame=p.ref_patch.start_frame,
            deg_start_frame=p.deg_patch.start_frame,
            frame_offset=p.frame_offset,
            sample_lag=p.sample_lag,
            nsim=p.mean_nsim(),
        )
        for p in pairs
    ]
    return QualityResult(
        mos=mos,
        overall_nsim=nsim.overall,
        fvnsim=nsim.fvnsim,
        per_frame_nsim=nsim.per_frame,
        per_patch=detail,
        center_freqs_hz=bands,
        global_lag_samples=lag,
        conformance_version=CONFORMANCE_VERSION,
        mode=cfg.mode,
        warnings=notes,
    )
