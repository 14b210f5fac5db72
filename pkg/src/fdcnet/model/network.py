"""The full feedback-coupled denoising/classification network.

Data flow (default configuration):

    x_noisy (B, C, T)
      -> channel gate on the raw channel view
      -> shared conv stem C -> d_model (kernel 7)
      -> denoise path: encoder (PE + time/freq attention layers) -> h_denoise
      -> classify path: GELU(stem output) -> h_classify
      -> T_fb feedback iterations exchanging messages between the latents
      -> decoder(h_denoise) + x_noisy = x_hat;  classify(h_classify) = (logits, p)

Ablation flags: feedback=False removes the message exchange entirely (the
paths run independently, bit-exactly equal to standalone path runs);
cross=False additionally unshares the conv stem; eegsp=False replaces the
learnable band-limited PE with the fixed classic table, removes the channel
gate, and runs every attention head in the time domain.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace

import numpy as np

from ..checkpoint import load_checkpoint, save_checkpoint
from ..errors import ConfigError, ContractError, DimensionError
from ..kernels import gelu, linear
from ..tensor import Tensor, add, as_tensor, mul, reshape, swapaxes, tmean
from .classifier import ClassifierHead, classify_forward
from .denoiser import ConvStem, Decoder, denoise_forward
from .encoder import EegspEncoder
from .feedback import FeedbackModule, feature_enhance, feedback_embed, feedback_project
from .gate import ChannelGate, channel_stats, modulate


@dataclass(frozen=True)
class ModelConfig:
    n_channels: int = 32
    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 8
    ff_dim: int = 256
    dropout: float = 0.1
    t_fb: int = 2
    feedback: bool = True
    cross: bool = True
    eegsp: bool = True
    gate_reduction: int = 4
    head_hidden: int = 64
    kernel_size: int = 7
    t_max: int = 512

    def validate(self) -> None:
        if self.n_channels < 1:
            raise ConfigError(f"n_channels must be >= 1, got {self.n_channels}")
        if self.d_model % 4 != 0:
            raise ConfigError(f"d_model must be divisible by 4, got {self.d_model}")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"n_heads {self.n_heads} must divide d_model {self.d_model}")
        if self.eegsp and self.n_heads % 2 != 0:
            raise ConfigError(f"n_heads must be even for the time/freq split, got {self.n_heads}")
        if self.eegsp and self.n_channels % self.gate_reduction != 0:
            raise ConfigError(
                f"gate_reduction {self.gate_reduction} must divide n_channels {self.n_channels}"
            )
        if self.t_fb < 1:
            raise ConfigError(f"t_fb must be >= 1, got {self.t_fb}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)

    def with_ablations(self, no_feedback=False, no_cross=False, no_eegsp=False) -> "ModelConfig":
        cfg = self
        if no_feedback or no_cross:
            cfg = replace(cfg, feedback=False)
        if no_cross:
            cfg = replace(cfg, cross=False)
        if no_eegsp:
            cfg = replace(cfg, eegsp=False)
        return cfg


@dataclass
class ForwardResult:
    x_hat: Tensor  # (B, C, T) reconstruction
    logits: Tensor  # (B, 2)
    p: Tensor  # (B, 2) per-dimension probabilities
    h_denoise: Tensor  # (B, T, d_model)
    h_classify: Tensor  # (B, T, d_model)


def _broadcast_t(vec, b: int, d: int) -> Tensor:
    return reshape(vec, (b, 1, d))


def dual_path_step(h_den, h_cls, prev_feedback, fb: FeedbackModule, t: int, t_fb: int):
    """One feedback iteration.

    prev_feedback is None (no message yet, first iteration) or a tuple
    (p_prev, f_prev) of the previous classification probabilities and the
    embedded classifier summary. Returns (h_den', h_cls', phi) where phi is
    the denoiser-to-classifier message.
    """
    if not 1 <= t <= t_fb:
        raise ContractError(f"iteration index {t} outside [1, {t_fb}]")
    b, _, d = h_den.shape
    if prev_feedback is not None:
        p_prev, f_prev = prev_feedback
        gate = feedback_project(p_prev, fb)
        h_den = mul(h_den, _broadcast_t(gate, b, d))
        low = feedback_embed(tmean(h_den, axis=1), fb)
        enhanced = feature_enhance(low, f_prev, fb)
        h_den = add(h_den, _broadcast_t(linear(enhanced, fb.inj_den_w), b, d))
    phi = feedback_embed(tmean(h_den, axis=1), fb)
    h_cls = add(h_cls, _broadcast_t(linear(phi, fb.inj_cls_w), b, d))
    return h_den, h_cls, phi


class FdcNet:
    def __init__(self, cfg: ModelConfig, seed: int = 0):
        cfg.validate()
        self.cfg = cfg
        streams = np.random.SeedSequence((seed, 0xFDC)).spawn(7)
        rngs = [np.random.default_rng(s) for s in streams]
        self.gate = ChannelGate(cfg.n_channels, cfg.gate_reduction, rngs[0]) if cfg.eegsp else None
        self.stem_den = ConvStem(cfg.n_channels, cfg.d_model, cfg.kernel_size, rngs[1])
        self.stem_cls = (
            self.stem_den if cfg.cross else ConvStem(cfg.n_channels, cfg.d_model, cfg.kernel_size, rngs[2])
        )
        self.encoder = EegspEncoder(
            cfg.d_model,
            cfg.n_layers,
            cfg.n_heads,
            cfg.ff_dim,
            cfg.dropout,
            rngs[3],
            t_max=cfg.t_max,
            learnable_pe=cfg.eegsp,
            freq_heads=cfg.eegsp,
        )
        self.decoder = Decoder(cfg.d_model, cfg.n_channels, cfg.kernel_size, rngs[4])
        self.head = ClassifierHead(cfg.d_model, cfg.head_hidden, rngs[5])
        self.fb = FeedbackModule(cfg.d_model, rngs[6])

    # -- forward --------------------------------------------------------------

    def forward(self, x_noisy, mode: str = "eval", rng=None, update_running: bool = True) -> ForwardResult:
        if mode not in ("train", "eval"):
            raise ConfigError(f"mode must be 'train' or 'eval', got {mode!r}")
        training = mode == "train"
        if training and self.cfg.dropout > 0.0 and rng is None:
            raise ConfigError("training forward with dropout needs an rng")
        x = as_tensor(x_noisy)
        if x.ndim != 3 or x.shape[1] != self.cfg.n_channels:
            raise DimensionError(
                f"expected (B, {self.cfg.n_channels}, T) input, got {x.shape}"
            )
        if self.gate is not None:
            xg = modulate(x, self.gate.weights(channel_stats(x)))
        else:
            xg = x
        s_den = self.stem_den.forward(xg)
        s_cls = s_den if self.cfg.cross else self.stem_cls.forward(xg)
        h_den = self.encoder.forward(swapaxes(s_den, 1, 2), training, rng)
        h_cls = swapaxes(gelu(s_cls), 1, 2)

        if self.cfg.feedback:
            message = None
            for t in range(1, self.cfg.t_fb + 1):
                h_den, h_cls, _ = dual_path_step(h_den, h_cls, message, self.fb, t, self.cfg.t_fb)
                logits, p = classify_forward(h_cls, self.head)
                if t < self.cfg.t_fb:
                    message = (p, feedback_embed(tmean(h_cls, axis=1), self.fb))
        else:
            logits, p = classify_forward(h_cls, self.head)

        x_hat = denoise_forward(x, h_den, self.decoder, training, update_running)
        return ForwardResult(x_hat=x_hat, logits=logits, p=p, h_denoise=h_den, h_classify=h_cls)

    # -- parameter registry ----------------------------------------------------

    def named_parameters(self) -> dict[str, Tensor]:
        """All parameters reachable in forward under the current flags, by
        checkpoint path. The registry is what the optimizer and checkpoint
        see, so unused ablated branches never demand gradients."""
        cfg = self.cfg
        out: dict[str, Tensor] = {}

        def absorb(prefix, module):
            for name, p in module.named_parameters().items():
                out[f"{prefix}.{name}"] = p

        if self.gate is not None:
            absorb("encoder.gate", self.gate)
        absorb("encoder", self.encoder)
        if cfg.cross:
            absorb("feedback.shared", self.stem_den)
        else:
            absorb("denoiser.stem", self.stem_den)
            absorb("classifier.stem", self.stem_cls)
        absorb("denoiser.decoder", self.decoder)
        absorb("classifier", self.head)
        if cfg.feedback:
            fb = self.fb.named_parameters()
            out["feedback.embed.w"] = fb["embed.w"]
            out["feedback.embed.b"] = fb["embed.b"]
            out["feedback.inj_cls.w"] = fb["inj_cls.w"]
            if cfg.t_fb >= 2:
                out["feedback.enhance.w"] = fb["enhance.w"]
                out["feedback.enhance.b"] = fb["enhance.b"]
                out["feedback.project.w"] = fb["project.w"]
                out["feedback.project.b"] = fb["project.b"]
                out["feedback.inj_den.w"] = fb["inj_den.w"]
        return out

    def named_buffers(self) -> dict[str, np.ndarray]:
        return {
            f"denoiser.decoder.{name}": buf for name, buf in self.decoder.named_buffers().items()
        }

    # -- checkpointing ---------------------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {path: p.data for path, p in self.named_parameters().items()}
        out.update({path: buf for path, buf in self.named_buffers().items()})
        return out

    def load_state(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        buffers = self.named_buffers()
        expected = set(params) | set(buffers)
        got = set(arrays)
        if expected != got:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ContractError(
                f"checkpoint does not match model: missing {missing or 'none'}, unexpected {extra or 'none'}"
            )
        for path, p in params.items():
            arr = np.asarray(arrays[path], dtype=np.float64)
            if arr.shape != p.shape:
                raise ContractError(f"shape mismatch for {path}: {arr.shape} vs {p.shape}")
            p.data[...] = arr
        for path, buf in buffers.items():
            arr = np.asarray(arrays[path], dtype=np.float64)
            if arr.shape != buf.shape:
                raise ContractError(f"shape mismatch for {path}: {arr.shape} vs {buf.shape}")
            buf[...] = arr

    def save(self, path) -> None:
        save_checkpoint(path, self.state_arrays())

    @classmethod
    def load(cls, path, cfg: ModelConfig, seed: int = 0) -> "FdcNet":
        model = cls(cfg, seed=seed)
        model.load_state(load_checkpoint(path))
        return model
