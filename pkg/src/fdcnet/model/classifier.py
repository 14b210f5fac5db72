"""Classification path: temporal-attention pooling, two-layer head,
frequency-weighted BCE, and quadrant accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DegenerateDataError, DimensionError
from ..kernels import gelu, linear, sigmoid, softmax
from ..tensor import Tensor, as_tensor, clamp, log, mul, neg, reshape, tmean, tsum

PROB_CLAMP = 1e-7


class ClassifierHead:
    def __init__(self, d_model: int, hidden: int, rng: np.random.Generator, n_out: int = 2):
        s = 1.0 / math.sqrt(d_model)
        self.d_model = d_model
        self.attn_w = Tensor(rng.normal(0.0, s, (1, d_model)), requires_grad=True)
        self.attn_b = Tensor(np.zeros(1), requires_grad=True)
        self.w1 = Tensor(rng.normal(0.0, s, (hidden, d_model)), requires_grad=True)
        self.b1 = Tensor(np.zeros(hidden), requires_grad=True)
        self.w2 = Tensor(rng.normal(0.0, 1.0 / math.sqrt(hidden), (n_out, hidden)), requires_grad=True)
        self.b2 = Tensor(np.zeros(n_out), requires_grad=True)

    def named_parameters(self) -> dict[str, Tensor]:
        return {
            "attn.w": self.attn_w,
            "attn.b": self.attn_b,
            "head.w1": self.w1,
            "head.b1": self.b1,
            "head.w2": self.w2,
            "head.b2": self.b2,
        }


def classify_forward(h_classify, params: ClassifierHead) -> tuple[Tensor, Tensor]:
    """(B, T, d_model) latent -> (logits, p), p = per-dimension sigmoid.

    Pooling is attention-weighted: a scalar score per time step, softmax over
    T, then the weighted temporal sum. Zero score weights reduce it to the
    plain temporal mean.
    """
    h = as_tensor(h_classify)
    if h.ndim != 3 or h.shape[2] != params.d_model:
        raise DimensionError(f"expected (B, T, {params.d_model}), got {h.shape}")
    b, t, d = h.shape
    scores = reshape(linear(h, params.attn_w, params.attn_b), (b, t))
    weights = softmax(scores)
    pooled = tsum(mul(h, reshape(weights, (b, t, 1))), axis=1)
    logits = linear(gelu(linear(pooled, params.w1, params.b1)), params.w2, params.b2)
    return logits, sigmoid(logits)


@dataclass(frozen=True)
class ClassWeights:
    w: np.ndarray  # (2,) loss weights 1/sqrt(f)
    f: np.ndarray  # (2,) positive-label frequencies


def class_weights(labels) -> ClassWeights:
    """Per-dimension positive frequency f_c and weight w_c = 1/sqrt(f_c)."""
    arr = np.asarray(labels, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise DimensionError(f"labels must be (N, 2), got {arr.shape}")
    f = arr.mean(axis=0)
    if (f <= 0.0).any() or (f >= 1.0).any():
        raise DegenerateDataError(
            f"label frequencies {f.tolist()} degenerate; need both classes per dimension"
        )
    return ClassWeights(w=1.0 / np.sqrt(f), f=f)


def weighted_bce(p, y, w) -> Tensor:
    """Mean over the batch of the weighted per-dimension binary cross
    entropy; probabilities clamped to [1e-7, 1 - 1e-7]."""
    p = as_tensor(p)
    y_arr = np.asarray(y.numpy() if isinstance(y, Tensor) else y, dtype=np.float64)
    w_arr = w.w if isinstance(w, ClassWeights) else np.asarray(w, dtype=np.float64)
    if p.shape != y_arr.shape:
        raise DimensionError(f"shape mismatch: p {p.shape} vs y {y_arr.shape}")
    if (p.data < 0.0).any() or (p.data > 1.0).any():
        raise ContractError("probabilities outside [0, 1] before clamping")
    pc = clamp(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    per = neg(mul(log(pc), y_arr) + mul(log(1.0 - pc), 1.0 - y_arr))
    return tmean(tsum(mul(per, w_arr.reshape(1, -1)), axis=1))


def accuracy_4class(p, y, threshold: float = 0.5) -> float:
    """Exact-quadrant match rate of thresholded (valence, arousal) pairs."""
    p_arr = np.asarray(p.numpy() if isinstance(p, Tensor) else p, dtype=np.float64)
    y_arr = np.asarray(y.numpy() if isinstance(y, Tensor) else y, dtype=np.float64)
    if p_arr.shape != y_arr.shape or p_arr.ndim != 2 or p_arr.shape[1] != 2:
        raise DimensionError(f"expected matching (B, 2) arrays, got {p_arr.shape} and {y_arr.shape}")
    pred = p_arr > threshold
    true = y_arr > 0.5
    return float(np.mean(np.all(pred == true, axis=1)))
