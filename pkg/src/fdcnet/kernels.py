"""Differentiable kernels on top of the tensor core.

Conventions:
  * conv1d is cross-correlation (the usual machine-learning convention),
    weight layout (C_out, C_in, K).
  * conv1d_transposed is its exact adjoint, weight layout (C_in, C_out, K),
    so the inner-product identity <conv(x, w), y> == <x, convT(y, w)> holds
    with the same weight tensor.
  * DCT-II / DCT-III use orthonormal scaling, so the inverse is the
    transpose and Parseval holds exactly.
  * GELU is the tanh approximation, differentiated analytically.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import ConfigError, DegenerateDataError, DimensionError
from .tensor import Tensor, as_tensor, make_op

# -- activations -------------------------------------------------------------

_GELU_C = math.sqrt(2.0 / math.pi)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    y = 1.0 / (1.0 + np.exp(-x.data))

    def bw(g):
        return [(x, g * y * (1.0 - y))]

    return make_op(y, (x,), bw, "sigmoid")


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def bw(g):
        return [(x, g * mask)]

    return make_op(np.where(mask, x.data, 0.0), (x,), bw, "relu")


def gelu(x) -> Tensor:
    x = as_tensor(x)
    d = x.data
    u = _GELU_C * (d + 0.044715 * d**3)
    t = np.tanh(u)
    y = 0.5 * d * (1.0 + t)

    def bw(g):
        du = _GELU_C * (1.0 + 3 * 0.044715 * d**2)
        return [(x, g * (0.5 * (1.0 + t) + 0.5 * d * (1.0 - t**2) * du))]

    return make_op(y, (x,), bw, "gelu")


def softmax(x) -> Tensor:
    """Softmax along the last dimension."""
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def bw(g):
        return [(x, (g - (g * y).sum(axis=-1, keepdims=True)) * y)]

    return make_op(y, (x,), bw, "softmax")


_ACTIVATIONS = {
    "sigmoid": sigmoid,
    "relu": relu,
    "gelu": gelu,
    "softmax-lastdim": softmax,
}


def activation(x, kind: str) -> Tensor:
    try:
        fn = _ACTIVATIONS[kind]
    except KeyError:
        raise ConfigError(
            f"unknown activation {kind!r}; expected one of {sorted(_ACTIVATIONS)}"
        ) from None
    return fn(x)


# -- affine layers -----------------------------------------------------------

def linear(x, w, b=None) -> Tensor:
    """y = x @ w.T (+ b); w has shape (out, in), x shape (..., in)."""
    x, w = as_tensor(x), as_tensor(w)
    if x.shape[-1] != w.shape[1]:
        raise DimensionError(f"linear: x {x.shape} incompatible with w {w.shape}")
    y = x.data @ w.data.T
    parents = [x, w]
    if b is not None:
        b = as_tensor(b)
        y = y + b.data
        parents.append(b)

    def bw(g):
        g2 = g.reshape(-1, g.shape[-1])
        x2 = x.data.reshape(-1, x.shape[-1])
        grads = [(x, g @ w.data), (w, g2.T @ x2)]
        if b is not None:
            grads.append((b, g2.sum(axis=0)))
        return grads

    return make_op(y, parents, bw, "linear")


def dropout(x, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout; identity when not training or rate == 0."""
    x = as_tensor(x)
    if not training or rate <= 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def bw(g):
        return [(x, g * mask)]

    return make_op(x.data * mask, (x,), bw, "dropout")


# -- 1-D convolution ---------------------------------------------------------

def _conv_windows(x: np.ndarray, k: int, stride: int) -> np.ndarray:
    """View of shape (B, C, T_out, K) over the (already padded) input."""
    b, c, t = x.shape
    t_out = (t - k) // stride + 1
    sb, sc, st = x.strides
    return as_strided(x, shape=(b, c, t_out, k), strides=(sb, sc, st * stride, st))


def conv1d(x, w, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation: x (B, C_in, T), w (C_out, C_in, K) -> (B, C_out, T_out)."""
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 3 or w.ndim != 3:
        raise DimensionError(f"conv1d expects 3-D x and w, got {x.shape}, {w.shape}")
    if x.shape[1] != w.shape[1]:
        raise DimensionError(f"conv1d channel mismatch: x {x.shape} vs w {w.shape}")
    k = w.shape[2]
    t_pad = x.shape[2] + 2 * padding
    if k > t_pad:
        raise DimensionError(
            f"kernel size {k} exceeds padded length {t_pad} (T={x.shape[2]}, padding={padding})"
        )
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding))) if padding else x.data
    win = _conv_windows(xp, k, stride)
    # contract (C_in, K) pairs through BLAS: (B, T_out, C_out) -> (B, C_out, T_out)
    y = np.tensordot(win, w.data, axes=([1, 3], [1, 2])).transpose(0, 2, 1)
    t_out = y.shape[2]

    def bw(g):
        gw = np.tensordot(g, win, axes=([0, 2], [0, 2]))
        gp = np.zeros_like(xp)
        for kk in range(k):
            # (B, T_out, C_out) @ (C_out, C_in) -> (B, T_out, C_in)
            part = np.matmul(g.transpose(0, 2, 1), w.data[:, :, kk])
            gp[:, :, kk : kk + t_out * stride : stride] += part.transpose(0, 2, 1)
        gx = gp[:, :, padding : gp.shape[2] - padding] if padding else gp
        return [(x, gx), (w, gw)]

    return make_op(np.ascontiguousarray(y), (x, w), bw, "conv1d")


def conv1d_transposed(x, w, stride: int = 1, padding: int = 0) -> Tensor:
    """Adjoint of conv1d: x (B, C_in, T), w (C_in, C_out, K) -> (B, C_out, T_up).

    T_up = (T - 1) * stride - 2 * padding + K.
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 3 or w.ndim != 3:
        raise DimensionError(f"conv1d_transposed expects 3-D x and w, got {x.shape}, {w.shape}")
    if x.shape[1] != w.shape[0]:
        raise DimensionError(f"conv1d_transposed channel mismatch: x {x.shape} vs w {w.shape}")
    b, _, t = x.shape
    k = w.shape[2]
    t_full = (t - 1) * stride + k
    t_up = t_full - 2 * padding
    if t_up < 1:
        raise DimensionError(
            f"conv1d_transposed output length {t_up} < 1 (T={t}, K={k}, stride={stride}, padding={padding})"
        )
    full = np.zeros((b, w.shape[1], t_full))
    for kk in range(k):
        # (B, T, C_in) @ (C_in, C_out) -> (B, T, C_out), scattered at offset kk
        part = np.matmul(x.data.transpose(0, 2, 1), w.data[:, :, kk])
        full[:, :, kk : kk + t * stride : stride] += part.transpose(0, 2, 1)
    y = full[:, :, padding : t_full - padding] if padding else full

    def bw(g):
        gf = np.pad(g, ((0, 0), (0, 0), (padding, padding))) if padding else g
        gwin = _conv_windows(gf, k, stride)
        gx = np.tensordot(gwin, w.data, axes=([1, 3], [1, 2])).transpose(0, 2, 1)
        gw = np.tensordot(x.data, gwin, axes=([0, 2], [0, 2]))
        return [(x, np.ascontiguousarray(gx)), (w, gw)]

    return make_op(y, (x, w), bw, "conv1d_transposed")


# -- normalization -----------------------------------------------------------

def batch_norm(
    x,
    gamma,
    beta,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    *,
    eps: float = 1e-5,
    momentum: float = 0.1,
    training: bool,
    update_running: bool = True,
) -> Tensor:
    """Per-channel batch norm over (B, T) of a (B, C, T) input.

    Training mode standardizes with biased batch statistics and (unless
    suppressed) folds them into the running buffers with the given momentum;
    eval mode uses the running buffers.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.ndim != 3:
        raise DimensionError(f"batch_norm expects (B, C, T), got {x.shape}")
    b, c, t = x.shape
    if gamma.shape != (c,) or beta.shape != (c,):
        raise DimensionError(f"batch_norm gamma/beta must be ({c},)")
    gm = gamma.data.reshape(1, c, 1)
    bt = beta.data.reshape(1, c, 1)
    if training:
        n = b * t
        if n < 2:
            raise DegenerateDataError(f"batch_norm needs B*T >= 2 in train mode, got {n}")
        mu = x.data.mean(axis=(0, 2))
        var = x.data.var(axis=(0, 2))
        if update_running:
            running_mean += momentum * (mu - running_mean)
            running_var += momentum * (var - running_var)
        ivar = 1.0 / np.sqrt(var + eps)
        xhat = (x.data - mu.reshape(1, c, 1)) * ivar.reshape(1, c, 1)

        def bw(g):
            gsum = g.sum(axis=(0, 2), keepdims=True)
            gx_sum = (g * xhat).sum(axis=(0, 2), keepdims=True)
            gx = (gm * ivar.reshape(1, c, 1) / n) * (n * g - gsum - xhat * gx_sum)
            return [
                (x, gx),
                (gamma, (g * xhat).sum(axis=(0, 2))),
                (beta, g.sum(axis=(0, 2))),
            ]

    else:
        ivar = 1.0 / np.sqrt(running_var + eps)
        xhat = (x.data - running_mean.reshape(1, c, 1)) * ivar.reshape(1, c, 1)

        def bw(g):
            return [
                (x, g * gm * ivar.reshape(1, c, 1)),
                (gamma, (g * xhat).sum(axis=(0, 2))),
                (beta, g.sum(axis=(0, 2))),
            ]

    return make_op(xhat * gm + bt, (x, gamma, beta), bw, "batch_norm")


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Layer norm over the last dimension."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    d = x.shape[-1]
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    ivar = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * ivar

    def bw(g):
        gh = g * gamma.data
        gx = ivar / d * (d * gh - gh.sum(axis=-1, keepdims=True) - xhat * (gh * xhat).sum(axis=-1, keepdims=True))
        lead = tuple(range(x.ndim - 1))
        return [
            (x, gx),
            (gamma, (g * xhat).sum(axis=lead)),
            (beta, g.sum(axis=lead)),
        ]

    return make_op(xhat * gamma.data + beta.data, (x, gamma, beta), bw, "layer_norm")


# -- orthonormal DCT ---------------------------------------------------------

_DCT_CACHE: dict[int, np.ndarray] = {}


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix C: y = C @ x; C @ C.T == I."""
    mat = _DCT_CACHE.get(n)
    if mat is None:
        t = np.arange(n)
        k = t.reshape(-1, 1)
        mat = np.cos(np.pi * (2 * t + 1) * k / (2.0 * n))
        mat *= np.sqrt(2.0 / n)
        mat[0] *= np.sqrt(0.5)
        _DCT_CACHE[n] = mat
    return mat


def dct_forward(x) -> Tensor:
    """Orthonormal DCT-II along the last dimension."""
    x = as_tensor(x)
    c = dct_matrix(x.shape[-1])

    def bw(g):
        return [(x, g @ c)]

    return make_op(x.data @ c.T, (x,), bw, "dct_forward")


def dct_inverse(x) -> Tensor:
    """Orthonormal DCT-III (inverse of dct_forward) along the last dimension."""
    x = as_tensor(x)
    c = dct_matrix(x.shape[-1])

    def bw(g):
        return [(x, g @ c.T)]

    return make_op(x.data @ c, (x,), bw, "dct_inverse")
