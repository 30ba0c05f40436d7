"""Regularized reverse-diffusion denoising and super-resolution for MR images.

Arrays are 2-D float64 numpy arrays (other dtypes are converted). Score models are
either the built-in analytic priors, a remote score server, or a Python subclass of
``ScoreModel`` implementing ``score(x, sigma)``.
"""

from ._core import (
    DenoiseConfig,
    DomainError,
    Error,
    GaussianPriorScore,
    GmmPriorScore,
    IoError,
    NoiseSchedule,
    RemoteScore,
    ScoreModel,
    TransportError,
    cnr,
    downup_project,
    dsm_loss,
    estimate_noise_std,
    generate,
    load_image,
    lowpass,
    plan_steps,
    posterior_ensemble,
    r2d2_denoise,
    r2d2_plus,
    save_image,
    snr,
    sr_data_consistency,
    sr_enhance,
    sweep_alpha,
    tweedie_denoise,
)

__all__ = [
    "DenoiseConfig",
    "DomainError",
    "Error",
    "GaussianPriorScore",
    "GmmPriorScore",
    "IoError",
    "NoiseSchedule",
    "RemoteScore",
    "ScoreModel",
    "TransportError",
    "cnr",
    "downup_project",
    "dsm_loss",
    "estimate_noise_std",
    "generate",
    "load_image",
    "lowpass",
    "plan_steps",
    "posterior_ensemble",
    "r2d2_denoise",
    "r2d2_plus",
    "save_image",
    "snr",
    "sr_data_consistency",
    "sr_enhance",
    "sweep_alpha",
    "tweedie_denoise",
]
