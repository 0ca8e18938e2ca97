"""Waveform and reference/surveillance measurement synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Alphabet,
    ConfigurationError,
    Hypothesis,
    NoiseModel,
    SubspaceModel,
    SystemConfig,
    complex_normal,
    psd_sqrt,
)

__all__ = [
    "ChannelMeasurements",
    "draw_symbols",
    "synthesize_waveform",
    "synthesize_trial",
    "synthesize_batch",
]

_QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ChannelMeasurements:
    """Per-receiver channel vectors.

    ``ref`` and ``surv`` have shape ``(..., L, N)``; ``alpha`` and ``beta``
    have shape ``(..., L)``. A leading batch axis is present for batches.
    """

    ref: np.ndarray
    surv: np.ndarray
    hypothesis: Hypothesis
    alpha: np.ndarray
    beta: np.ndarray
    waveform: np.ndarray


def _size(size):
    if size is None:
        return ()
    if np.isscalar(size):
        return (int(size),)
    return tuple(size)


def draw_symbols(sub: SubspaceModel, rng: np.random.Generator, size=None) -> np.ndarray:
    """Symbol vectors with zero mean and covariance ``sub.symbol_cov``."""
    shape = _size(size) + (sub.d,)
    cov = sub.symbol_cov
    if sub.alphabet is Alphabet.QPSK:
        off = cov - np.diag(np.diag(cov))
        if np.any(np.abs(off) > 0):
            raise ConfigurationError("QPSK symbols require a diagonal symbol covariance")
        scale = np.sqrt(np.clip(np.diag(cov).real, 0.0, None))
        return _QPSK[rng.integers(0, 4, size=shape)] * scale
    root = psd_sqrt(cov)
    return complex_normal(rng, shape) @ root.T


def synthesize_waveform(sub: SubspaceModel, rng: np.random.Generator, size=None) -> np.ndarray:
    """x = U theta, lying in the span of the subspace basis."""
    return draw_symbols(sub, rng, size) @ sub.basis.T


def synthesize_batch(
    cfg: SystemConfig,
    sub: SubspaceModel,
    noise: NoiseModel,
    hypothesis,
    rng: np.random.Generator,
    n_trials: int,
) -> ChannelMeasurements:
    """Draw ``n_trials`` independent trials for all receivers.

    One waveform is shared by every receiver within a trial. The draw layout
    is the same under both hypotheses, so the same generator state yields
    identical reference channels and noise for H0 and H1.
    """
    hypothesis = Hypothesis(hypothesis)
    t, l, n = int(n_trials), cfg.n_receivers, cfg.n_samples
    x = synthesize_waveform(sub, rng, t)
    beta = cfg.mu_beta + np.sqrt(cfg.sigma_beta_sq) * complex_normal(rng, (t, l))
    alpha = np.sqrt(cfg.sigma_alpha_sq) * complex_normal(rng, (t, l))
    d_ref = complex_normal(rng, (t, l, n)) @ noise.sqrt_ref.T
    d_surv = complex_normal(rng, (t, l, n)) @ noise.sqrt_surv.T
    ref = beta[..., None] * x[:, None, :] + d_ref
    if hypothesis is Hypothesis.H1:
        surv = alpha[..., None] * x[:, None, :] + d_surv
    else:
        surv = d_surv
        alpha = np.zeros_like(alpha)
    return ChannelMeasurements(ref, surv, hypothesis, alpha, beta, x)


def synthesize_trial(cfg, sub, noise, hypothesis, rng) -> ChannelMeasurements:
    """Single trial: arrays without the batch axis."""
    b = synthesize_batch(cfg, sub, noise, hypothesis, rng, 1)
    return ChannelMeasurements(b.ref[0], b.surv[0], b.hypothesis, b.alpha[0], b.beta[0], b.waveform[0])
