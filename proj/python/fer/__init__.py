"""Facial expression recognition pipeline (C++ core)."""

from ._core import (
    Bundle,
    FerError,
    SdleModel,
    confusion_metrics,
    default_config,
    evaluate,
    gabor_features,
    harris_corners,
    hist_equalize,
    integral_sum,
    lbp_codes,
    lbp_features,
    le_embed,
    load_bundle,
    mean_filter,
    metrics_from_counts,
    read_image,
    round_half_up,
    sdle_fit,
    synth_dataset,
    train,
    write_pgm,
)

__all__ = [
    "Bundle",
    "FerError",
    "SdleModel",
    "confusion_metrics",
    "default_config",
    "evaluate",
    "gabor_features",
    "harris_corners",
    "hist_equalize",
    "integral_sum",
    "lbp_codes",
    "lbp_features",
    "le_embed",
    "load_bundle",
    "mean_filter",
    "metrics_from_counts",
    "read_image",
    "round_half_up",
    "sdle_fit",
    "synth_dataset",
    "train",
    "write_pgm",
]
