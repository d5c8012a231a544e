"""Reservoir co-activation prototype classifier (RECAP).

Thin Python layer over the C++ core: untrained leaky echo-state reservoir,
level quantization, co-activation masks, Hebbian prototype templates, the
ESN-Ridge baseline, native MNIST-C-style corruptions and the CE/RelCE/mCE
metrics.
"""

from ._recap import (
    MODEL_FORMAT_VERSION,
    PRNG_ID,
    SEVERITY_TABLE_VERSION,
    CoactivationMask,
    ConfigError,
    DataError,
    ErrorTable,
    HebbSpec,
    NumericError,
    QuantizerSpec,
    RecapModel,
    Reservoir,
    ReservoirSpec,
    RidgeModel,
    RidgeSpec,
    build_mask,
    corrupt,
    corruption_error,
    corruption_kinds,
    is_native_corruption,
    load,
    quantize,
    relative_ce,
    relative_mce,
    severity_strength,
    train_recap,
    train_ridge,
)

__all__ = [
    "MODEL_FORMAT_VERSION",
    "PRNG_ID",
    "SEVERITY_TABLE_VERSION",
    "CoactivationMask",
    "ConfigError",
    "DataError",
    "ErrorTable",
    "HebbSpec",
    "NumericError",
    "QuantizerSpec",
    "RecapModel",
    "Reservoir",
    "ReservoirSpec",
    "RidgeModel",
    "RidgeSpec",
    "build_mask",
    "corrupt",
    "corruption_error",
    "corruption_kinds",
    "is_native_corruption",
    "load",
    "quantize",
    "relative_ce",
    "relative_mce",
    "severity_strength",
    "train_recap",
    "train_ridge",
]

__version__ = "0.1.0"
