"""Mapping NSIM features to MOS: speech polynomial and audio RBF-SVR."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import (
    CorruptModelError,
    DimensionMismatchError,
    InsufficientDataError,
    VersionMismatchError,
)

MOS_MIN = 1.0
MOS_MAX = 5.0

_MODEL_MAGIC = "refmos-svr-model"
_MODEL_VERSION = 1

# Cubic fit through the shipped anchor curve: transparent signals map near
# the ceiling, degradations fall off smoothly. Ascending powers.
DEFAULT_SPEECH_POLY = (
    0.5829461566258943,
    0.9345477776056385,
    0.8233957978422388,
    2.4488926746166424,
)

DEFAULT_C_GRID = tuple(2.0 ** k for k in range(-3, 8))
DEFAULT_GAMMA_GRID = tuple(2.0 ** k for k in range(-7, 4))
SVR_EPSILON = 0.2


def _clamp_mos(value: float) -> float:
    return float(min(max(value, MOS_MIN), MOS_MAX))


@dataclass(frozen=True)
class PolynomialMapping:
    """Monotone polynomial NSIM-to-MOS map, clamped to [1, 5]."""

    coefficients: tuple
    clamp: tuple = (MOS_MIN, MOS_MAX)

    def __post_init__(self):
        xs = np.arange(0.0, 1.0 + 1e-9, 1e-3)
        ys = np.polynomial.polynomial.polyval(xs, np.asarray(self.coefficients))
        if np.any(np.diff(ys) < -1e-12):
            raise ValueError("polynomial mapping must be nondecreasing on [0, 1]")

    def __call__(self, nsim: float) -> float:
        raw = float(np.polynomial.polynomial.polyval(nsim, np.asarray(self.coefficients)))
        lo, hi = self.clamp
        return float(min(max(raw, lo), hi))


DEFAULT_SPEECH_MAPPING = PolynomialMapping(DEFAULT_SPEECH_POLY)


def polynomial_mos(overall_nsim: float, mapping: PolynomialMapping | None = None) -> float:
    """Evaluate the polynomial mapping and clamp to [1, 5]."""
    return (mapping or DEFAULT_SPEECH_MAPPING)(overall_nsim)


@dataclass(frozen=True)
class SvrModel:
    """RBF support-vector regressor over per-band NSIM features.

    Support vectors live in standardized feature space; queries are
    standardized with feature_means/feature_scales before the kernel sum.
    """

    support_vectors: np.ndarray  # [n_sv, n_features]
    dual_coefs: np.ndarray       # [n_sv]
    bias: float
    gamma: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    conformance_tag: str

    @property
    def n_features(self) -> int:
        return self.feature_means.size

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if np.any(self.feature_scales <= 0):
            raise ValueError("feature scales must be > 0")


def svr_predict(fvnsim: np.ndarray, model: SvrModel) -> float:
    """Kernel-sum prediction clamped to [1, 5]."""
    x = np.asarray(fvnsim, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise DimensionMismatchError(
            f"feature vector has shape {x.shape}, model expects ({model.n_features},)"
        )
    raw = model.bias
    if model.support_vectors.shape[0]:
        xs = (x - model.feature_means) / model.feature_scales
        d2 = np.sum((model.support_vectors - xs) ** 2, axis=1)
        raw = raw + float(model.dual_coefs @ np.exp(-model.gamma * d2))
    return _clamp_mos(raw)


@dataclass(frozen=True)
class CvReport:
    """Full cross-validation RMSE grid from train_svr."""

    c_values: np.ndarray
    gamma_values: np.ndarray
    rmse: np.ndarray  # [len(c_values), len(gamma_values)]
    best_c: float
    best_gamma: float
    best_rmse: float


def _standardize_params(features: np.ndarray):
    means = features.mean(axis=0)
    scales = features.std(axis=0)
    scales = np.where(scales > 0, scales, 1.0)
    return means, scales


def _training_tag(features: np.ndarray, labels: np.ndarray, c: float, gamma: float) -> str:
    h = hashlib.sha256()
    h.update(features.tobytes())
    h.update(labels.tobytes())
    h.update(repr((c, gamma)).encode())
    return "svr-" + h.hexdigest()[:12]


def train_svr(
    features: np.ndarray,
    labels: np.ndarray,
    c_grid=DEFAULT_C_GRID,
    gamma_grid=DEFAULT_GAMMA_GRID,
    folds: int = 4,
    epsilon: float = SVR_EPSILON,
):
    """Grid-searched epsilon-SVR over a feature matrix and MOS labels.

    Folds are assigned round-robin in row order; the (C, gamma) minimizing
    mean per-fold RMSE wins, ties broken toward smaller C then smaller
    gamma. Returns (SvrModel, CvReport). Deterministic for fixed row order.
    """
    from sklearn.svm import SVR

    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("features must be [n, d] with one label per row")
    n = X.shape[0]
    if n < folds:
        raise InsufficientDataError(f"{n} rows cannot fill {folds} folds")

    means, scales = _standardize_params(X)
    if np.ptp(y) == 0.0:
        warnings.warn("all training labels are equal; returning a constant predictor",
                      stacklevel=2)
        model = SvrModel(
            support_vectors=np.zeros((0, X.shape[1])),
            dual_coefs=np.zeros(0),
            bias=float(y[0]),
            gamma=1.0,
            feature_means=means,
            feature_scales=scales,
            conformance_tag=_training_tag(X, y, 0.0, 0.0),
        )
        report = CvReport(
            c_values=np.asarray(c_grid, dtype=np.float64),
            gamma_values=np.asarray(gamma_grid, dtype=np.float64),
            rmse=np.zeros((len(c_grid), len(gamma_grid))),
            best_c=float("nan"),
            best_gamma=float("nan"),
            best_rmse=0.0,
        )
        return model, report

    Xs = (X - means) / scales
    fold_ids = np.arange(n) % folds
    c_values = np.asarray(c_grid, dtype=np.float64)
    gamma_values = np.asarray(gamma_grid, dtype=np.float64)
    rmse = np.empty((c_values.size, gamma_values.size))
    best = None
    for ci, c in enumerate(c_values):
        for gi, g in enumerate(gamma_values):
            fold_rmse = []
            for f in range(folds):
                train = fold_ids != f
                svr = SVR(kernel="rbf", C=c, gamma=g, epsilon=epsilon)
                svr.fit(Xs[train], y[train])
                err = svr.predict(Xs[~train]) - y[~train]
                fold_rmse.append(np.sqrt(np.mean(err * err)))
            score = float(np.mean(fold_rmse))
            rmse[ci, gi] = score
            if best is None or score < best[0]:
                best = (score, c, g)

    best_rmse, best_c, best_gamma = best
    svr = SVR(kernel="rbf", C=best_c, gamma=best_gamma, epsilon=epsilon)
    svr.fit(Xs, y)
    model = SvrModel(
        support_vectors=np.array(svr.support_vectors_, dtype=np.float64),
        dual_coefs=np.array(svr.dual_coef_[0], dtype=np.float64),
        bias=float(svr.intercept_[0]),
        gamma=float(best_gamma),
        feature_means=means,
        feature_scales=scales,
        conformance_tag=_training_tag(X, y, best_c, best_gamma),
    )
    report = CvReport(
        c_values=c_values,
        gamma_values=gamma_values,
        rmse=rmse,
        best_c=float(best_c),
        best_gamma=float(best_gamma),
        best_rmse=best_rmse,
    )
    return model, report


def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def save_model(model: SvrModel) -> bytes:
    """Serialize a model to the versioned plain-text format (lossless)."""
    lines = [
        f"{_MODEL_MAGIC} v{_MODEL_VERSION}",
        f"conformance_tag {model.conformance_tag}",
        f"n_features {model.n_features}",
        f"gamma {model.gamma!r}",
        f"bias {model.bias!r}",
        f"feature_means {_fmt_floats(model.feature_means)}",
        f"feature_scales {_fmt_floats(model.feature_scales)}",
        f"n_support_vectors {model.support_vectors.shape[0]}",
        f"dual_coefs {_fmt_floats(model.dual_coefs)}".rstrip(),
    ]
    for row in model.support_vectors:
        lines.append(f"sv {_fmt_floats(row)}")
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("ascii")


def _parse_floats(parts, expected: int, what: str) -> np.ndarray:
    if len(parts) != expected:
        raise CorruptModelError(f"{what}: expected {expected} values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise CorruptModelError(f"{what}: {exc}") from exc


def load_model(data: bytes) -> SvrModel:
    """Parse a serialized model; inverse of save_model."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise CorruptModelError(f"not a text model file: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(_MODEL_MAGIC):
        raise CorruptModelError("missing model header")
    version_token = lines[0][len(_MODEL_MAGIC):].strip()
    if version_token != f"v{_MODEL_VERSION}":
        raise VersionMismatchError(f"unknown model format version {version_token!r}")

    fields = {}
    sv_rows = []
    saw_end = False
    for line in lines[1:]:
        parts = line.split()
        key, rest = parts[0], parts[1:]
        if key == "end":
            saw_end = True
            break
        if key == "sv":
            sv_rows.append(rest)
        else:
            fields[key] = rest
    if not saw_end:
        raise CorruptModelError("model file truncated (no end marker)")

    try:
        n_features = int(fields["n_features"][0])
        n_sv = int(fields["n_support_vectors"][0])
        gamma = float(fields["gamma"][0])
        bias = float(fields["bias"][0])
        tag = fields["conformance_tag"][0] if fields.get("conformance_tag") else ""
        means = _parse_floats(fields["feature_means"], n_features, "feature_means")
        scales = _parse_floats(fields["feature_scales"], n_features, "feature_scales")
        duals = _parse_floats(fields.get("dual_coefs", []), n_sv, "dual_coefs")
    except (KeyError, IndexError, ValueError) as exc:
        raise CorruptModelError(f"bad model field: {exc}") from exc
    if len(sv_rows) != n_sv:
        raise CorruptModelError(f"expected {n_sv} support vectors, got {len(sv_rows)}")
    vectors = (
        np.vstack([_parse_floats(row, n_features, "sv") for row in sv_rows])
        if sv_rows else np.zeros((0, n_features))
    )
    return SvrModel(
        support_vectors=vectors,
        dual_coefs=duals,
        bias=bias,
        gamma=gamma,
        feature_means=means,
        feature_scales=scales,
        conformance_tag=tag,
    )


@lru_cache(maxsize=1)
def default_audio_model() -> SvrModel:
    """Shipped audio-mode model, trained on synthetic degradations."""
    data = resources.files("refmos").joinpath("models/default_audio.svrmodel").read_bytes()
    return load_model(data)
