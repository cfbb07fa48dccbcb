"""Silence thresholding and neurogram similarity (NSIM) on gammatone spectrograms."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import EmptyInputError, ShapeMismatchError
from .spectrogram import GammatoneSpectrogram


@dataclass(frozen=True)
class ThresholdParams:
    """Silence floors applied jointly to a reference/degraded spectrogram pair.

    abs_floor_db is an absolute level in the spectrogram's dB scale (0 dB ~
    full-scale sine power), so near-silent content in both signals clamps to
    a common value. rel_offset_db is subtracted from the louder of the two
    cells to form the per-cell relative floor.
    """

    abs_floor_db: float = -80.0
    rel_offset_db: float = 45.0

    def __post_init__(self):
        if self.rel_offset_db <= 0:
            raise ValueError("rel_offset_db must be > 0")
        if self.abs_floor_db >= 0:
            raise ValueError("abs_floor_db must be < 0")


def threshold_values(
    ref_values: np.ndarray, deg_values: np.ndarray, params: ThresholdParams
):
    """Apply absolute and relative silence floors to a pair of dB matrices."""
    if ref_values.shape != deg_values.shape:
        raise ShapeMismatchError(
            f"reference {ref_values.shape} vs degraded {deg_values.shape}"
        )
    floor = np.maximum(ref_values, deg_values) - params.rel_offset_db
    floor = np.maximum(floor, params.abs_floor_db)
    return np.maximum(ref_values, floor), np.maximum(deg_values, floor)


def threshold_pair(
    ref_spec: GammatoneSpectrogram,
    deg_spec: GammatoneSpectrogram,
    params: ThresholdParams,
):
    """Thresholded copies of an aligned spectrogram pair (idempotent, symmetric)."""
    ref_vals, deg_vals = threshold_values(ref_spec.values, deg_spec.values, params)
    return replace(ref_spec, values=ref_vals), replace(deg_spec, values=deg_vals)


def _gaussian_kernel_3x3(sigma: float = 0.5) -> np.ndarray:
    ax = np.arange(-1.0, 2.0)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


_NSIM_KERNEL = _gaussian_kernel_3x3()


def _local_mean(x: np.ndarray, weight_sum: np.ndarray) -> np.ndarray:
    num = ndimage.correlate(x, _NSIM_KERNEL, mode="constant", cval=0.0)
    return num / weight_sum


def nsim_map(ref_values: np.ndarray, deg_values: np.ndarray, dynamic_range: float) -> np.ndarray:
    """Per-cell NSIM (luminance x structure) of two equally-shaped dB maps.

    Local moments use a 3x3 Gaussian window (sigma 0.5); edge cells use
    truncated, renormalized windows. Inputs are shifted so their joint
    minimum is 0 before the moments are taken.
    """
    r = np.asarray(ref_values, dtype=np.float64)
    d = np.asarray(deg_values, dtype=np.float64)
    if r.shape != d.shape:
        raise ShapeMismatchError(f"reference {r.shape} vs degraded {d.shape}")
    if dynamic_range <= 0:
        raise ValueError("dynamic range must be > 0")

    shift = min(r.min(), d.min())
    r = r - shift
    d = d - shift

    weight_sum = ndimage.correlate(
        np.ones_like(r), _NSIM_KERNEL, mode="constant", cval=0.0
    )
    mu_r = _local_mean(r, weight_sum)
    mu_d = _local_mean(d, weight_sum)
    var_r = np.maximum(_local_mean(r * r, weight_sum) - mu_r * mu_r, 0.0)
    var_d = np.maximum(_local_mean(d * d, weight_sum) - mu_d * mu_d, 0.0)
    cov = _local_mean(r * d, weight_sum) - mu_r * mu_d

    c1 = (0.01 * dynamic_range) ** 2
    c2 = ((0.03 * dynamic_range) ** 2) / 2.0
    luminance = (2.0 * mu_r * mu_d + c1) / (mu_r * mu_r + mu_d * mu_d + c1)
    structure = (cov + c2) / (np.sqrt(var_r * var_d) + c2)
    return np.minimum(luminance * structure, 1.0)


@dataclass(frozen=True)
class NsimResult:
    """Aggregated NSIM detail for a scored pair."""

    fvnsim: np.ndarray     # per-band mean, length n_bands
    per_frame: np.ndarray  # mean over bands per aligned frame, patch order
    per_patch: np.ndarray  # mean per patch pair
    overall: float         # mean of per_patch


def aggregate_nsim(pairs) -> NsimResult:
    """Aggregate the nsim_cells of aligned patch pairs (equal patch weights)."""
    if not pairs:
        raise EmptyInputError("no patch pairs to aggregate")
    cells = [np.asarray(p.nsim_cells, dtype=np.float64) for p in pairs]
    n_bands = cells[0].shape[0]
    if any(c.shape[0] != n_bands for c in cells):
        raise ShapeMismatchError("patch pairs disagree on band count")
    stacked = np.concatenate(cells, axis=1)
    per_patch = np.array([c.mean() for c in cells])
    return NsimResult(
        fvnsim=stacked.mean(axis=1),
        per_frame=stacked.mean(axis=0),
        per_patch=per_patch,
        overall=float(per_patch.mean()),
    )
