"""Scaled dot-product attention heads in the time and DCT-coefficient domains.

Heads accept (..., T, d_h) with any leading batch/head dims. The frequency
head conjugates the same attention by an orthonormal DCT along the token
axis, so forcing the attention matrix to identity reduces it to a pure DCT
round trip.
"""

from __future__ import annotations

import math

from ..errors import DimensionError
from ..kernels import dct_forward, dct_inverse, softmax
from ..tensor import Tensor, as_tensor, matmul, swapaxes

# test hook: when True the attention matrix is replaced by the identity
FORCE_IDENTITY = False


def _check(q, k, v):
    if not (q.shape == k.shape == v.shape):
        raise DimensionError(f"Q/K/V shapes disagree: {q.shape}, {k.shape}, {v.shape}")
    if q.ndim < 2:
        raise DimensionError(f"attention needs (..., T, d_h), got {q.shape}")


def attention_head_time(q, k, v) -> Tensor:
    """softmax(Q K^T / sqrt(d_h)) V."""
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    _check(q, k, v)
    if FORCE_IDENTITY:
        return v
    scale = 1.0 / math.sqrt(q.shape[-1])
    weights = softmax(matmul(q, swapaxes(k, -1, -2)) * scale)
    return matmul(weights, v)


def _dct_tokens(x) -> Tensor:
    # DCT along the token axis (second to last)
    return swapaxes(dct_forward(swapaxes(x, -1, -2)), -1, -2)


def _idct_tokens(x) -> Tensor:
    return swapaxes(dct_inverse(swapaxes(x, -1, -2)), -1, -2)


def attention_head_freq(q, k, v) -> Tensor:
    """Attention computed between DCT coefficient sequences, mapped back to
    the time domain."""
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    _check(q, k, v)
    return _idct_tokens(attention_head_time(_dct_tokens(q), _dct_tokens(k), _dct_tokens(v)))
