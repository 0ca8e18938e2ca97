"""Noise-whitened subspace transforms and the per-receiver CC statistic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ConfigurationError, NoiseModel, SubspaceModel

__all__ = [
    "CcKernel",
    "build_kernel",
    "cross_correlate",
    "cross_correlate_kernel",
    "kernel_cc",
    "whitening_only_cc",
    "whitening_kernel",
]


@dataclass(frozen=True, eq=False)
class CcKernel:
    """Matrices defining c_i for one (subspace, noise) pair.

    ``t_ref``/``t_surv`` are the D x N transforms applied to the *whitened*
    channel vectors; ``proj_ref``/``proj_surv`` fold the whitening in, so
    ``proj_ref @ r == t_ref @ (inv_sqrt_ref @ r)``. ``kernel_a`` is the
    N x N matrix with ``c = r^H kernel_a s``.
    """

    t_ref: np.ndarray
    t_surv: np.ndarray
    m_u: np.ndarray
    c_ref: np.ndarray
    c_surv: np.ndarray
    kernel_a: np.ndarray
    proj_ref: np.ndarray
    proj_surv: np.ndarray


def _subspace_cov(basis, inv_sqrt, channel):
    # U^H Sigma^{-1} U computed through the whitened basis keeps it Hermitian
    wb = inv_sqrt @ basis
    info = wb.conj().T @ wb
    w = np.linalg.eigvalsh(info)
    if w.max() <= 0 or w.min() < 1e-12 * w.max():
        raise ConfigurationError(f"{channel} channel: U^H Sigma^-1 U is numerically singular")
    cov = np.linalg.inv(info)
    return 0.5 * (cov + cov.conj().T)


def build_kernel(sub: SubspaceModel, noise: NoiseModel) -> CcKernel:
    u = sub.basis
    uh = u.conj().T
    c_ref = _subspace_cov(u, noise.inv_sqrt_ref, "reference")
    c_surv = _subspace_cov(u, noise.inv_sqrt_surv, "surveillance")
    t_ref = c_ref @ uh @ noise.inv_sqrt_ref
    t_surv = c_surv @ uh @ noise.inv_sqrt_surv
    m_u = uh @ noise.inv_sqrt_ref @ noise.inv_sqrt_surv @ u
    proj_ref = t_ref @ noise.inv_sqrt_ref
    proj_surv = t_surv @ noise.inv_sqrt_surv
    kernel_a = proj_ref.conj().T @ m_u @ proj_surv
    mats = [t_ref, t_surv, m_u, c_ref, c_surv, kernel_a, proj_ref, proj_surv]
    for a in mats:
        a.setflags(write=False)
    return CcKernel(*mats)


def cross_correlate(kernel: CcKernel, ref, surv=None) -> np.ndarray:
    """c = r~^H M_U s~ over the trailing axis; leading axes are broadcast.

    ``ref`` may also be a ``ChannelMeasurements`` record.
    """
    if surv is None:
        ref, surv = ref.ref, ref.surv
    ref = np.asarray(ref)
    surv = np.asarray(surv)
    shape = ref.shape[:-1]
    rt = np.ascontiguousarray((ref @ kernel.proj_ref.T).reshape(-1, kernel.m_u.shape[0]))
    st = np.ascontiguousarray((surv @ kernel.proj_surv.T).reshape(-1, kernel.m_u.shape[0]))
    return kernels.bilinear_rows(rt, kernel.m_u, st).reshape(shape)


def kernel_cc(a, ref, surv) -> np.ndarray:
    """c = r^H a s over the trailing axis."""
    return np.einsum("...n,...n->...", np.conj(ref), np.asarray(surv) @ np.asarray(a).T)


def cross_correlate_kernel(kernel: CcKernel, ref, surv) -> np.ndarray:
    return kernel_cc(kernel.kernel_a, ref, surv)


def whitening_only_cc(noise: NoiseModel, ref, surv=None) -> np.ndarray:
    """Baseline CC: full-length whitened inner product, no subspace step."""
    if surv is None:
        ref, surv = ref.ref, ref.surv
    return kernel_cc(whitening_kernel(noise), ref, surv)


def whitening_kernel(noise: NoiseModel) -> np.ndarray:
    """N x N kernel of the whitening-only CC."""
    return noise.inv_sqrt_ref.conj().T @ noise.inv_sqrt_surv
