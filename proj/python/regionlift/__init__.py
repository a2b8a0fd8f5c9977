"""Region-classifier rescoring of object detections."""

from ._regionlift import (
    SvmModel,
    alpha,
    default_config,
    evaluate,
    interpolated_ap,
    llc_encode,
    rescore_feature_dim,
    run,
    simulate,
    spm_dimension,
    support_set,
    train_model,
    train_svm,
)

__all__ = [
    "SvmModel",
    "alpha",
    "default_config",
    "evaluate",
    "interpolated_ap",
    "llc_encode",
    "rescore_feature_dim",
    "run",
    "simulate",
    "spm_dimension",
    "support_set",
    "train_model",
    "train_svm",
]
