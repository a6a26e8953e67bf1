"""Image-steganography semantic communication simulator."""

from _semsteg import (  # noqa: F401
    CodecConfig,
    CodecModel,
    ConfigError,
    DegenerateSignalError,
    FormatError,
    Rng,
    ShapeError,
    auc,
    awgn,
    haar_dwt,
    highfreq_preprocess,
    inverse_haar_dwt,
    load_pnm,
    power_normalize,
    psnr,
    rayleigh,
    run_experiment,
    save_pnm,
    ssim,
    synth_dataset,
    train_codec,
)

__all__ = [
    "CodecConfig",
    "CodecModel",
    "ConfigError",
    "DegenerateSignalError",
    "FormatError",
    "Rng",
    "ShapeError",
    "auc",
    "awgn",
    "haar_dwt",
    "highfreq_preprocess",
    "inverse_haar_dwt",
    "load_pnm",
    "power_normalize",
    "psnr",
    "rayleigh",
    "run_experiment",
    "save_pnm",
    "ssim",
    "synth_dataset",
    "train_codec",
]
