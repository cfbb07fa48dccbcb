"""Deterministic test-signal and degradation generators.

Everything here is reproducible bit-for-bit from explicit seeds (PCG64) so
the conformance and property suites can freeze expected scores.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import firwin

from .audio_io import AudioSignal, save_wav
from .errors import InvalidSpecError

LOWPASS_TAPS = 255


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _finish(x: np.ndarray, rate: int, amplitude: float) -> AudioSignal:
    peak = np.abs(x).max()
    if peak > 0:
        x = x * (amplitude / peak)
    return AudioSignal(x, rate)


def sine(freq_hz: float, duration_s: float, rate: int, amplitude: float = 0.25,
         phase: float = 0.0) -> AudioSignal:
    t = np.arange(int(round(duration_s * rate))) / rate
    return AudioSignal(amplitude * np.sin(2 * np.pi * freq_hz * t + phase), rate)


def harmonic_tone(f0_hz: float, n_harmonics: int, duration_s: float, rate: int,
                  amplitude: float = 0.25) -> AudioSignal:
    t = np.arange(int(round(duration_s * rate))) / rate
    x = np.zeros_like(t)
    for k in range(1, n_harmonics + 1):
        if k * f0_hz >= rate / 2:
            break
        x += np.sin(2 * np.pi * k * f0_hz * t) / k
    return _finish(x, rate, amplitude)


def am_tone(carrier_hz: float, mod_hz: float, duration_s: float, rate: int,
            amplitude: float = 0.25) -> AudioSignal:
    t = np.arange(int(round(duration_s * rate))) / rate
    env = 0.5 * (1.0 + np.sin(2 * np.pi * mod_hz * t))
    return AudioSignal(amplitude * env * np.sin(2 * np.pi * carrier_hz * t), rate)


def chirp_tone(f_start_hz: float, f_end_hz: float, duration_s: float, rate: int,
               amplitude: float = 0.25) -> AudioSignal:
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    sweep = f_start_hz * t + (f_end_hz - f_start_hz) * t * t / (2 * duration_s)
    return AudioSignal(amplitude * np.sin(2 * np.pi * sweep), rate)


def seeded_noise(duration_s: float, rate: int, seed: int,
                 amplitude: float = 0.25) -> AudioSignal:
    x = _rng(seed).standard_normal(int(round(duration_s * rate)))
    return _finish(x, rate, amplitude)


def _formant_envelope(freq_hz: np.ndarray) -> np.ndarray:
    env = np.full_like(freq_hz, 0.03)
    for center, width, gain in ((700.0, 130.0, 1.0), (1220.0, 170.0, 0.55),
                                (2600.0, 320.0, 0.3)):
        env += gain / (1.0 + ((freq_hz - center) / width) ** 2)
    return env


def speech_like(duration_s: float = 4.0, rate: int = 16000, seed: int = 101,
                amplitude: float = 0.3) -> AudioSignal:
    """Voiced-speech stand-in: pitched harmonics under formants, syllabic gating."""
    rng = _rng(seed)
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate

    f0 = 112.0 * (1.0 + 0.05 * np.sin(2 * np.pi * 0.45 * t + rng.uniform(0, 2 * np.pi)))
    phase = 2 * np.pi * np.cumsum(f0) / rate
    x = np.zeros(n)
    k = 1
    while k * 130.0 < rate / 2 - 200 and k <= 48:
        weight = _formant_envelope(np.array(k * 112.0)) / k
        x += float(weight) * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
        k += 1

    # syllable gate: ~0.2 s bursts with short gaps, longer pause every 4th
    env = np.zeros(n)
    pos = 0
    syllable = 0
    while pos < n:
        on = int((0.16 + 0.10 * rng.random()) * rate)
        off = int((0.30 if syllable % 4 == 3 else 0.06) * rate)
        ramp = int(0.02 * rate)
        seg = np.ones(min(on, n - pos))
        if seg.size > 2 * ramp:
            fade = 0.5 * (1 - np.cos(np.pi * np.arange(ramp) / ramp))
            seg[:ramp] = fade
            seg[-ramp:] = fade[::-1]
        env[pos:pos + seg.size] = seg
        pos += on + off
        syllable += 1

    x = x * env + 0.002 * rng.standard_normal(n) * env  # breath only while voiced
    return _finish(x, rate, amplitude)


def music_like(duration_s: float = 4.0, rate: int = 48000, seed: int = 202,
               amplitude: float = 0.25) -> AudioSignal:
    """Music stand-in: plucked chord partials plus bright percussive noise."""
    rng = _rng(seed)
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    x = np.zeros(n)

    chords = [(220.0, 277.18, 329.63), (246.94, 311.13, 369.99)]
    note_len = 0.8
    onset = 0.0
    idx = 0
    while onset < duration_s:
        start = int(onset * rate)
        seg_t = t[start:] - onset
        decay = np.exp(-seg_t / 0.5)
        for f in chords[idx % len(chords)]:
            detune = 1.0 + 0.0004 * rng.standard_normal()
            for k in range(1, 13):
                fk = k * f * detune
                if fk >= rate / 2:
                    break
                x[start:] += (decay / k**1.3) * np.sin(2 * np.pi * fk * seg_t
                                                       + rng.uniform(0, 2 * np.pi))
        onset += note_len
        idx += 1

    # cymbal-ish bursts keep energy up to ~18 kHz so lowpass cuts are audible
    bright = _rng(seed + 1).standard_normal(n)
    taps = firwin(LOWPASS_TAPS, [5000.0, 18000.0], fs=rate, pass_zero=False)
    bright = np.convolve(bright, taps, mode="same")
    hit_env = np.zeros(n)
    for onset_s in np.arange(0.1, duration_s, 0.4):
        start = int(onset_s * rate)
        length = min(int(0.09 * rate), n - start)
        hit_env[start:start + length] = np.exp(-np.arange(length) / (0.025 * rate))
    x += 0.8 * bright * hit_env
    return _finish(x, rate, amplitude)


@dataclass(frozen=True)
class DegradationSpec:
    """One named degradation: delay (samples), awgn (SNR dB), lowpass (Hz), gain (dB)."""

    kind: str
    parameter: float


def apply_degradation(signal: AudioSignal, spec: DegradationSpec,
                      seed: int = 0) -> AudioSignal:
    """Apply a degradation deterministically. Same seed, same bytes."""
    x = signal.samples
    rate = signal.sample_rate_hz
    if spec.kind == "delay":
        k = int(spec.parameter)
        if k < 0 or k >= x.size:
            raise InvalidSpecError(f"delay of {k} samples out of range")
        y = np.concatenate([np.zeros(k), x])[: x.size]
    elif spec.kind == "awgn":
        snr_db = float(spec.parameter)
        p_signal = np.mean(x * x)
        if p_signal == 0:
            raise InvalidSpecError("cannot set an SNR against a silent signal")
        noise = _rng(seed).standard_normal(x.size)
        target = p_signal / 10.0 ** (snr_db / 10.0)
        noise *= np.sqrt(target / np.mean(noise * noise))
        y = x + noise
    elif spec.kind == "lowpass":
        cutoff = float(spec.parameter)
        if not (0.0 < cutoff < rate / 2):
            raise InvalidSpecError(f"cutoff {cutoff} Hz outside (0, Nyquist)")
        taps = firwin(LOWPASS_TAPS, cutoff, fs=rate)
        y = np.convolve(x, taps, mode="same")
    elif spec.kind == "gain":
        y = x * 10.0 ** (float(spec.parameter) / 20.0)
    else:
        raise InvalidSpecError(f"unknown degradation kind {spec.kind!r}")
    peak = np.abs(y).max()
    if peak > 1.0:  # headroom guard; common scaling preserves SNR and shape
        y = y * (0.999 / peak)
    return AudioSignal(y, rate)


def standard_fixtures(mode: str) -> dict:
    """Five diverse named fixtures per mode (16 kHz speech / 48 kHz audio)."""
    if mode == "speech":
        return {
            "speech_a": speech_like(4.0, 16000, seed=101),
            "speech_b": speech_like(3.5, 16000, seed=131),
            "tone_mix": harmonic_tone(220.0, 20, 3.2, 16000),
            "am_tone": am_tone(1000.0, 4.0, 3.2, 16000),
            "chirp": chirp_tone(120.0, 7200.0, 3.2, 16000),
        }
    if mode == "audio":
        return {
            "music_a": music_like(4.0, 48000, seed=202),
            "music_b": music_like(3.5, 48000, seed=232),
            "chord": harmonic_tone(261.63, 24, 3.2, 48000),
            "sweep": chirp_tone(150.0, 20000.0, 3.2, 48000),
            "bright_noise": seeded_noise(3.2, 48000, seed=77, amplitude=0.2),
        }
    raise ValueError(f"unknown mode {mode!r}")


def write_fixture_wavs(out_dir) -> list:
    """Regenerate the standard fixture WAVs; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for mode in ("speech", "audio"):
        for name, sig in standard_fixtures(mode).items():
            path = out / f"{mode}_{name}.wav"
            save_wav(path, sig)
            written.append(path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Regenerate the deterministic fixture WAVs.")
    parser.add_argument("out_dir", help="directory to write WAV files into")
    args = parser.parse_args(argv)
    for path in write_fixture_wavs(args.out_dir):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
