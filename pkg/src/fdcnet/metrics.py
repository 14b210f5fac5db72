"""Signal-quality metrics: SNR (dB), Pearson correlation, MSE."""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateDataError, DimensionError

SNR_CLAMP_DB = 100.0


def _pair(clean, denoised) -> tuple[np.ndarray, np.ndarray]:
    clean = np.asarray(clean, dtype=np.float64)
    denoised = np.asarray(denoised, dtype=np.float64)
    if clean.shape != denoised.shape:
        raise DimensionError(f"shape mismatch: {clean.shape} vs {denoised.shape}")
    return clean, denoised


def metric_snr(clean, denoised) -> float:
    """10*log10(sum(clean^2) / sum((clean-denoised)^2)), clamped at +100 dB
    when the residual is numerically zero."""
    clean, denoised = _pair(clean, denoised)
    sig = float(np.sum(np.square(clean)))
    if sig == 0.0:
        raise DegenerateDataError("clean signal has zero power; SNR undefined")
    res = float(np.sum(np.square(clean - denoised)))
    if res == 0.0:
        return SNR_CLAMP_DB
    return min(10.0 * math.log10(sig / res), SNR_CLAMP_DB)


def metric_cc(clean, denoised) -> float:
    """Pearson correlation over flattened samples, in [-1, 1]."""
    clean, denoised = _pair(clean, denoised)
    a = clean.ravel()
    b = denoised.ravel()
    a = a - a.mean()
    b = b - b.mean()
    va = float(a @ a)
    vb = float(b @ b)
    if va == 0.0 or vb == 0.0:
        raise DegenerateDataError("zero-variance input; correlation undefined")
    return float(np.clip((a @ b) / math.sqrt(va * vb), -1.0, 1.0))


def metric_mse(clean, denoised) -> float:
    clean, denoised = _pair(clean, denoised)
    return float(np.mean(np.square(clean - denoised)))
