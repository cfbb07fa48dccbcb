"""refmos: full-reference objective audio/speech quality estimation.

Compares a degraded signal against its clean reference on a gammatone
(ERB-scale) spectrogram, scores similarity with NSIM, and maps the result to
an estimated mean opinion score (MOS-LQO).
"""

from .audio_io import AudioSignal, load_wav, prepare_pair, save_wav
from .errors import RefmosError
from .mos_mapping import (
    PolynomialMapping,
    SvrModel,
    load_model,
    polynomial_mos,
    save_model,
    svr_predict,
    train_svr,
)
from .pipeline import (
    CONFORMANCE_VERSION,
    Config,
    QualityResult,
    compare,
    conformance_version,
)
from .similarity import NsimResult, ThresholdParams

__version__ = "0.1.0"

__all__ = [
    "AudioSignal",
    "CONFORMANCE_VERSION",
    "Config",
    "NsimResult",
    "PolynomialMapping",
    "QualityResult",
    "RefmosError",
    "SvrModel",
    "ThresholdParams",
    "compare",
    "conformance_version",
    "load_model",
    "load_wav",
    "polynomial_mos",
    "prepare_pair",
    "save_model",
    "save_wav",
    "svr_predict",
    "train_svr",
    "__version__",
]
