"""Seeded, block-structured Monte Carlo harness.

Trials are grouped into fixed-size blocks and each block draws from its own
stream ``derive_stream(seed, block, tag)``. Results therefore depend only on
``(seed, n_trials)``, never on the order in which blocks are evaluated.
"""

from __future__ import annotations

import numpy as np

from .model import Hypothesis, NoiseModel, SubspaceModel, SystemConfig, derive_stream
from .signals import synthesize_batch
from .subspace import CcKernel, build_kernel, cross_correlate, whitening_only_cc

__all__ = ["BLOCK_SIZE", "blocks", "stream_tag", "cc_samples", "pipeline_samples", "sample_variance", "CC_METHODS"]

BLOCK_SIZE = 2048
CC_METHODS = ("subspace", "whitening")

# stream roles; combined with the hypothesis into one tag
MEASUREMENT, COLLAB_NOISE, MAC_NOISE = 0, 1, 2


def stream_tag(role: int, hypothesis) -> int:
    return 16 * int(Hypothesis(hypothesis)) + role


def blocks(n_trials: int, block_size: int = BLOCK_SIZE):
    """(block index, start, size) triples covering ``n_trials``."""
    n_trials = int(n_trials)
    for b, start in enumerate(range(0, n_trials, block_size)):
        yield b, start, min(block_size, n_trials - start)


def _cc_block(cfg, sub, noise, kernel, hypothesis, rng, size, method):
    meas = synthesize_batch(cfg, sub, noise, hypothesis, rng, size)
    if method == "subspace":
        return cross_correlate(kernel, meas.ref, meas.surv)
    if method == "whitening":
        return whitening_only_cc(noise, meas.ref, meas.surv)
    raise ValueError(f"unknown CC method {method!r}; expected one of {CC_METHODS}")


def cc_samples(
    cfg: SystemConfig,
    sub: SubspaceModel,
    noise: NoiseModel,
    hypothesis,
    n_trials: int,
    seed: int | None = None,
    kernel: CcKernel | None = None,
    method: str = "subspace",
    block_order=None,
) -> np.ndarray:
    """CC statistics, shape ``(n_trials, L)``.

    ``block_order`` permutes block evaluation; it exists to exercise the
    order-independence contract and does not change the result.
    """
    seed = cfg.seed if seed is None else seed
    if kernel is None and method == "subspace":
        kernel = build_kernel(sub, noise)
    out = np.empty((int(n_trials), cfg.n_receivers), dtype=complex)
    todo = list(blocks(n_trials))
    if block_order is not None:
        todo = [todo[k] for k in block_order]
    tag = stream_tag(MEASUREMENT, hypothesis)
    for b, start, size in todo:
        rng = derive_stream(seed, b, tag)
        out[start : start + size] = _cc_block(cfg, sub, noise, kernel, hypothesis, rng, size, method)
    return out


def pipeline_samples(
    cfg: SystemConfig,
    sub: SubspaceModel,
    noise: NoiseModel,
    designs: dict,
    hypothesis,
    n_trials: int,
    seed: int | None = None,
    kernel: CcKernel | None = None,
    method: str = "subspace",
    cc: np.ndarray | None = None,
) -> dict:
    """Fusion-centre samples ``z`` for several designs sharing one set of CC draws.

    Collaboration and MAC noise come from their own streams, so every design
    sees the same measurements.
    """
    from .detect import collaborate, fuse

    seed = cfg.seed if seed is None else seed
    if cc is None:
        cc = cc_samples(cfg, sub, noise, hypothesis, n_trials, seed, kernel, method)
    out = {}
    for name, design in designs.items():
        z = np.empty(cc.shape[0], dtype=complex)
        for b, start, size in blocks(cc.shape[0]):
            r_eps = derive_stream(seed, b, stream_tag(COLLAB_NOISE, hypothesis))
            r_eta = derive_stream(seed, b, stream_tag(MAC_NOISE, hypothesis))
            y = collaborate(design, cc[start : start + size], r_eps)
            z[start : start + size] = fuse(design.gains, y, design.sigma_eta_sq, r_eta).z
        out[name] = z
    return out


def sample_variance(z: np.ndarray, axis=0):
    """Variance of complex samples (E|z - mean|^2) and its standard error."""
    z = np.asarray(z)
    n = z.shape[axis]
    dev = np.abs(z - z.mean(axis=axis, keepdims=True)) ** 2
    var = dev.sum(axis=axis) / (n - 1)
    se = dev.std(axis=axis, ddof=1) / np.sqrt(n)
    return var, se

