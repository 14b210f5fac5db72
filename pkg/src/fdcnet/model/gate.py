"""Channel-aware dynamic gating: squeeze (temporal mean), two-layer
excitation, and per-channel multiplicative modulation."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, DimensionError
from ..kernels import linear, relu, sigmoid
from ..tensor import Tensor, as_tensor, mul, reshape, tmean


def channel_stats(x) -> Tensor:
    """Temporal mean per channel: (B, C, T) or (B, C, 1, T) -> (B, C)."""
    x = as_tensor(x)
    if x.ndim == 4:
        if x.shape[2] != 1:
            raise DimensionError(f"expected singleton third axis, got {x.shape}")
        x = reshape(x, (x.shape[0], x.shape[1], x.shape[3]))
    if x.ndim != 3:
        raise DimensionError(f"channel_stats expects (B, C, T), got {x.shape}")
    return tmean(x, axis=2)


class ChannelGate:
    def __init__(self, n_channels: int, reduction: int = 4, rng: np.random.Generator | None = None):
        if reduction < 1 or n_channels % reduction != 0:
            raise ConfigError(f"reduction {reduction} must divide n_channels {n_channels}")
        rng = rng or np.random.default_rng(0)
        hidden = n_channels // reduction
        self.n_channels = n_channels
        self.w1 = Tensor(rng.normal(0.0, 1.0 / math.sqrt(n_channels), (hidden, n_channels)), requires_grad=True)
        self.b1 = Tensor(np.zeros(hidden), requires_grad=True)
        self.w2 = Tensor(rng.normal(0.0, 1.0 / math.sqrt(hidden), (n_channels, hidden)), requires_grad=True)
        self.b2 = Tensor(np.zeros(n_channels), requires_grad=True)

    def weights(self, z) -> Tensor:
        """(B, C) channel statistics -> gate values strictly inside (0, 1)."""
        z = as_tensor(z)
        if z.ndim != 2 or z.shape[1] != self.n_channels:
            raise DimensionError(f"expected (B, {self.n_channels}), got {z.shape}")
        return sigmoid(linear(relu(linear(z, self.w1, self.b1)), self.w2, self.b2))

    def named_parameters(self) -> dict[str, Tensor]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}


def channel_gate_weights(z, gate: ChannelGate) -> Tensor:
    return gate.weights(z)


def modulate(x, alpha) -> Tensor:
    """Scale each channel of (B, C, T) (or (B, C, 1, T)) by its (B, C) gate."""
    x = as_tensor(x)
    alpha = as_tensor(alpha)
    if alpha.ndim != 2 or x.shape[:2] != alpha.shape:
        raise DimensionError(f"modulate shapes disagree: x {x.shape}, alpha {alpha.shape}")
    extra = (1,) * (x.ndim - 2)
    return mul(x, reshape(alpha, alpha.shape + extra))
