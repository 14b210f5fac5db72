"""Synthetic clean-EEG generation, artifact surrogates, and windowing.

Clean trials are sums of band-limited random-phase sinusoid mixtures over the
canonical EEG bands plus 1/f pink noise. Labels are planted spectrally:
valence scales alpha-band power and arousal scales beta-band power by
(1 ± label_effect), which makes the classification task learnable from band
power while keeping everything else label-independent.

All generation is a pure function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateDataError, DimensionError

# canonical band edges in Hz
BANDS: dict[str, tuple[float, float]] = {
    "delta": (1.0, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 30.0),
    "gamma": (30.0, 45.0),
}

# default relative band powers; together with pink_power they sum to 1 so a
# default trial has RMS close to 1 and the sigma=0.01 Gaussian floor sits
# near -40 dB
DEFAULT_BAND_POWERS: dict[str, float] = {
    "delta": 0.10,
    "theta": 0.25,
    "alpha": 0.30,
    "beta": 0.15,
    "gamma": 0.05,
}


@dataclass(frozen=True)
class SynthSpec:
    n_subjects: int = 4
    trials_per_subject: int = 25
    n_channels: int = 32
    sample_rate_hz: float = 128.0
    trial_length_s: float = 10.5
    band_powers: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BAND_POWERS))
    pink_power: float = 0.15
    label_effect: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.n_subjects < 1 or self.trials_per_subject < 1 or self.n_channels < 1:
            raise ConfigError("n_subjects, trials_per_subject, n_channels must be >= 1")
        if self.sample_rate_hz <= 0 or self.trial_length_s <= 0:
            raise ConfigError("sample_rate_hz and trial_length_s must be positive")
        # trials must fit at least one default-length analysis window
        if self.sample_rate_hz * self.trial_length_s < 128:
            raise ConfigError(
                f"trial holds {self.sample_rate_hz * self.trial_length_s:.0f} samples; "
                "need at least one 128-sample window"
            )
        for name, p in self.band_powers.items():
            if name not in BANDS:
                raise ConfigError(f"unknown band {name!r}; expected one of {sorted(BANDS)}")
            if p < 0:
                raise ConfigError(f"band power for {name!r} must be >= 0, got {p}")
        if self.pink_power < 0:
            raise ConfigError("pink_power must be >= 0")
        if not 0.0 <= self.label_effect <= 1.0:
            raise ConfigError(f"label_effect must be in [0, 1], got {self.label_effect}")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.trial_length_s))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


def _band_mixture(rng, n: int, fs: float, lo: float, hi: float, power: float) -> np.ndarray:
    """Sum of random-phase sinusoids with uniform random frequencies in
    [lo, hi] and expected total power `power`."""
    if power == 0.0:
        return np.zeros(n)
    n_sin = max(3, int(round(hi - lo)))
    freqs = rng.uniform(lo, hi, n_sin)
    phases = rng.uniform(0.0, 2.0 * math.pi, n_sin)
    amp = math.sqrt(2.0 * power / n_sin)
    t = np.arange(n) / fs
    return amp * np.sin(2.0 * math.pi * freqs[:, None] * t + phases[:, None]).sum(axis=0)


def _pink_noise(rng, n: int, fs: float, power: float) -> np.ndarray:
    """1/f-power noise normalized to the requested mean power."""
    if power == 0.0 or n < 2:
        return np.zeros(n)
    white = rng.standard_normal(n)
    f = np.fft.rfftfreq(n, 1.0 / fs)
    shape = np.zeros_like(f)
    shape[1:] = 1.0 / np.sqrt(f[1:])
    x = np.fft.irfft(np.fft.rfft(white) * shape, n)
    r = _rms(x)
    return x * (math.sqrt(power) / r) if r > 0 else x


def synth_clean_eeg(spec: SynthSpec) -> list[tuple[np.ndarray, int, int, int]]:
    """Generate all trials described by a SynthSpec.

    Returns a list of (trial (C, n_samples) float64, valence, arousal,
    subject_id), deterministic per spec.seed.
    """
    spec.validate()
    n = spec.n_samples
    fs = spec.sample_rate_hz
    root = np.random.SeedSequence(spec.seed)
    children = root.spawn(spec.n_subjects * spec.trials_per_subject)
    out = []
    idx = 0
    for subject in range(spec.n_subjects):
        for _ in range(spec.trials_per_subject):
            rng = np.random.default_rng(children[idx])
            idx += 1
            valence = int(rng.random() < 0.5)
            arousal = int(rng.random() < 0.5)
            powers = dict(spec.band_powers)
            e = spec.label_effect
            if "alpha" in powers:
                powers["alpha"] *= (1.0 + e) if valence else (1.0 - e)
            if "beta" in powers:
                powers["beta"] *= (1.0 + e) if arousal else (1.0 - e)
            trial = np.empty((spec.n_channels, n))
            for c in range(spec.n_channels):
                sig = _pink_noise(rng, n, fs, spec.pink_power)
                for name, (lo, hi) in BANDS.items():
                    sig = sig + _band_mixture(rng, n, fs, lo, hi, powers.get(name, 0.0))
                trial[c] = sig
            out.append((trial, valence, arousal, subject))
    return out


def _bandpass_white(rng, n: int, fs: float, lo: float, hi: float) -> np.ndarray:
    """White noise hard-masked in the frequency domain to [lo, hi] Hz."""
    f = np.fft.rfftfreq(n, 1.0 / fs)
    mask = (f >= lo) & (f <= hi)
    if not mask.any():
        raise DegenerateDataError(
            f"no frequency bins in [{lo}, {hi}] Hz for length {n} at {fs} Hz"
        )
    return np.fft.irfft(np.fft.rfft(rng.standard_normal(n)) * mask, n)


def synth_artifact(kind: str, length: int, seed, sample_rate: float = 128.0) -> np.ndarray:
    """Unit-RMS artifact surrogate.

    emg: 20-45 Hz filtered white noise under a slow random burst envelope.
    eog: sub-4 Hz smoothed random-step drift plus blink bumps.
    """
    if length < 1:
        raise DimensionError(f"artifact length must be >= 1, got {length}")
    rng = _rng(seed)
    fs = sample_rate
    if kind == "emg":
        band = _bandpass_white(rng, length, fs, 20.0, 45.0)
        slow = _bandpass_white(rng, length, fs, 0.0, 1.0)
        env = 0.2 + (slow - slow.min())
        x = band * env
    elif kind == "eog":
        # random-step drift: piecewise-constant levels held ~0.7 s each
        hold = max(1, int(round(0.7 * fs)))
        n_steps = length // hold + 2
        steps = np.repeat(rng.normal(0.0, 1.0, n_steps), hold)[:length]
        # blink bumps: positive Gaussian transients
        n_blinks = max(1, int(round(length / fs * 0.25)))
        t = np.arange(length) / fs
        blinks = np.zeros(length)
        for _ in range(n_blinks):
            center = rng.uniform(0.0, length / fs)
            width = rng.uniform(0.08, 0.15)
            amp = rng.uniform(1.0, 3.0)
            blinks += amp * np.exp(-0.5 * ((t - center) / width) ** 2)
        raw = steps + blinks
        # hard low-pass keeps the spectrum strictly below 4 Hz
        f = np.fft.rfftfreq(length, 1.0 / fs)
        x = np.fft.irfft(np.fft.rfft(raw) * (f < 3.5), length)
    else:
        raise ConfigError(f"unknown artifact kind {kind!r}; expected 'emg' or 'eog'")
    r = _rms(x)
    if r == 0.0:
        raise DegenerateDataError(f"{kind} surrogate degenerated to zero RMS at length {length}")
    return x / r


def segment_windows(trial: np.ndarray, window: int = 128, overlap: float = 0.5) -> list[np.ndarray]:
    """Sliding windows along the last axis; stride = window*(1-overlap),
    trailing remainder dropped."""
    trial = np.asarray(trial, dtype=np.float64)
    t = trial.shape[-1]
    if t < window:
        raise DimensionError(f"trial length {t} shorter than window {window}")
    if not 0.0 <= overlap < 1.0:
        raise ConfigError(f"overlap must be in [0, 1), got {overlap}")
    stride = int(round(window * (1.0 - overlap)))
    if stride < 1:
        raise ConfigError(f"window {window} with overlap {overlap} gives stride < 1")
    count = (t - window) // stride + 1
    return [trial[..., i * stride : i * stride + window].copy() for i in range(count)]
