"""Second-order moments of the CC statistic and the fused FC sample.

Closed forms assume a proper complex Gaussian waveform with covariance
``U Sigma_theta U^H``. Every closed form here has a Monte Carlo counterpart
(`mc_*`) that shares none of its algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import Hypothesis, NoiseModel, SubspaceModel, SystemConfig, complex_normal, psd_sqrt
from .montecarlo import cc_samples, sample_variance
from .subspace import CcKernel

__all__ = [
    "CcMoments",
    "QuadFormMoments",
    "quad_form_moments",
    "bilinear_form_second_moment",
    "mc_quad_form_moments",
    "mc_bilinear_form_second_moment",
    "cc_moments_closed_form",
    "cc_moments_from_kernel",
    "mc_cc_moments",
    "cc_cross_covariance_check",
    "fused_variance",
    "MaskViolation",
]


class MaskViolation(ValueError):
    """A collaboration matrix has weight outside the topology mask."""


@dataclass(frozen=True)
class CcMoments:
    var_h0: float
    var_h1: float

    def var(self, hypothesis) -> float:
        return self.var_h1 if Hypothesis(hypothesis) is Hypothesis.H1 else self.var_h0


class QuadFormMoments(NamedTuple):
    mean: complex
    var_mag: float
    second_moment: float


def _tr(a):
    return np.trace(a)


def quad_form_moments(m, cov) -> QuadFormMoments:
    """Moments of Q = z^H m z with z ~ CN(0, cov).

    E[Q] = tr(m cov) and E|Q|^2 = tr(m cov m^H cov) + |tr(m cov)|^2, so the
    magnitude variance E|Q - E Q|^2 is tr(m cov m^H cov).
    """
    m = np.asarray(m, dtype=complex)
    cov = np.asarray(cov, dtype=complex)
    mean = _tr(m @ cov)
    var_mag = float(_tr(m @ cov @ m.conj().T @ cov).real)
    return QuadFormMoments(complex(mean), var_mag, var_mag + abs(mean) ** 2)


def bilinear_form_second_moment(m, cov_u, cov_v) -> float:
    """E|u^H m v|^2 = tr(m cov_v m^H cov_u) for independent zero-mean u, v."""
    m = np.asarray(m, dtype=complex)
    return float(_tr(m @ np.asarray(cov_v) @ m.conj().T @ np.asarray(cov_u)).real)


def mc_quad_form_moments(m, cov, n_draws, rng) -> QuadFormMoments:
    m = np.asarray(m, dtype=complex)
    root = psd_sqrt(cov)
    z = complex_normal(rng, (int(n_draws), m.shape[0])) @ root.T
    q = np.einsum("tn,tn->t", z.conj(), z @ m.T)
    mean = q.mean()
    second = float(np.mean(np.abs(q) ** 2))
    return QuadFormMoments(complex(mean), second - abs(mean) ** 2, second)


def mc_bilinear_form_second_moment(m, cov_u, cov_v, n_draws, rng) -> float:
    m = np.asarray(m, dtype=complex)
    u = complex_normal(rng, (int(n_draws), m.shape[0])) @ psd_sqrt(cov_u).T
    v = complex_normal(rng, (int(n_draws), m.shape[1])) @ psd_sqrt(cov_v).T
    b = np.einsum("tn,tn->t", u.conj(), v @ m.T)
    return float(np.mean(np.abs(b) ** 2))


def cc_moments_closed_form(cfg: SystemConfig, kernel: CcKernel, sub: SubspaceModel) -> CcMoments:
    """Variances of c_i under H0/H1 in subspace coordinates."""
    mu, cr, cs, th = kernel.m_u, kernel.c_ref, kernel.c_surv, sub.symbol_cov
    muh = mu.conj().T
    eb = cfg.beta_power
    sa = cfg.sigma_alpha_sq
    mcm = mu @ cs @ muh
    var0 = eb * _tr(mcm @ th).real + _tr(mcm @ cr).real
    extra = _tr(muh @ cr @ mu @ th).real + eb * (
        _tr(mu @ th @ muh @ th).real + abs(_tr(mu @ th)) ** 2
    )
    return CcMoments(float(var0), float(var0 + sa * extra))


def cc_moments_from_kernel(cfg: SystemConfig, kernel_a, noise: NoiseModel, sub: SubspaceModel) -> CcMoments:
    """Variances of c = r^H A s for an arbitrary N x N kernel.

    Assembled term by term from the generic quadratic/bilinear identities in
    the full N-dimensional space. Used for the whitening-only baseline and as
    an independent route to `cc_moments_closed_form`.
    """
    a = np.asarray(kernel_a, dtype=complex)
    sx = sub.waveform_cov
    eb = cfg.beta_power
    # beta* x^H A d_s and d_r^H A d_s
    var0 = eb * bilinear_form_second_moment(a, sx, noise.cov_surv) + bilinear_form_second_moment(
        a, noise.cov_ref, noise.cov_surv
    )
    # alpha d_r^H A x and beta* alpha x^H A x
    extra = bilinear_form_second_moment(a, noise.cov_ref, sx) + eb * quad_form_moments(a, sx).second_moment
    return CcMoments(float(var0), float(var0 + cfg.sigma_alpha_sq * extra))


@dataclass(frozen=True)
class McCcMoments:
    var_h0: float
    var_h1: float
    se_h0: float
    se_h1: float
    mean_h0: complex
    mean_h1: complex
    mean_se_h0: float
    mean_se_h1: float
    n_samples: int


def mc_cc_moments(cfg, sub, noise, n_trials, seed=None, kernel=None, method="subspace", receivers=None) -> McCcMoments:
    """Sample variance of c_i under each hypothesis.

    ``receivers`` limits how many receivers are simulated per trial (the
    marginal law of c_i is the same for every receiver), which keeps large
    trial counts cheap.
    """
    if receivers is not None:
        cfg = cfg.replace(n_receivers=receivers, n_transmitters=min(receivers, cfg.n_transmitters),
                          mac_gain=cfg.mac_gain[: min(receivers, cfg.n_transmitters)])
    res = {}
    for h in Hypothesis:
        c = cc_samples(cfg, sub, noise, h, n_trials, seed, kernel, method).ravel()
        var, se = sample_variance(c)
        mean = c.mean()
        mse = float(np.sqrt(np.var(c) / c.size))
        res[h] = (float(var), float(se), complex(mean), mse)
    return McCcMoments(
        res[Hypothesis.H0][0], res[Hypothesis.H1][0],
        res[Hypothesis.H0][1], res[Hypothesis.H1][1],
        res[Hypothesis.H0][2], res[Hypothesis.H1][2],
        res[Hypothesis.H0][3], res[Hypothesis.H1][3],
        int(c.size),
    )


def cc_cross_covariance_check(cfg, sub, noise, n_trials, seed=None, kernel=None, n_se=4.0) -> list[dict]:
    """MC estimates of Cov(c_i, c_j) and E[c_i c_j] for every pair i < j.

    Real and imaginary parts are tested separately against ``n_se``
    standard errors of zero. Empty when there is a single receiver.
    """
    report = []
    if cfg.n_receivers < 2:
        return report
    for h in Hypothesis:
        c = cc_samples(cfg, sub, noise, h, n_trials, seed, kernel)
        c = c - c.mean(axis=0)
        for i in range(cfg.n_receivers):
            for j in range(i + 1, cfg.n_receivers):
                for kind, p in (("cov", c[:, i] * c[:, j].conj()), ("pseudo", c[:, i] * c[:, j])):
                    est = p.mean()
                    se_re = p.real.std(ddof=1) / np.sqrt(p.size)
                    se_im = p.imag.std(ddof=1) / np.sqrt(p.size)
                    z = max(abs(est.real) / se_re, abs(est.imag) / se_im)
                    report.append(
                        dict(hypothesis=h.name, i=i, j=j, kind=kind, estimate=complex(est),
                             se_re=float(se_re), se_im=float(se_im), z=float(z), passed=bool(z <= n_se))
                    )
    return report


def check_mask(w_matrix, adjacency):
    w = np.asarray(w_matrix)
    adj = np.asarray(adjacency)
    if w.shape != adj.shape:
        raise MaskViolation(f"W has shape {w.shape}, topology mask has shape {adj.shape}")
    if np.any(w[adj == 0] != 0):
        raise MaskViolation("W has nonzero weight outside the topology mask")


def fused_variance(w_matrix, moments: CcMoments, hypothesis, gains, sigma_eps_sq, sigma_eta_sq, adjacency=None) -> float:
    """Var(z | H) = var_c ||W^H g||^2 + sigma_eps^2 ||g||^2 + sigma_eta^2."""
    w = np.asarray(w_matrix, dtype=complex)
    if adjacency is not None:
        check_mask(w, adjacency)
    g = np.asarray(gains, dtype=complex)
    signal = float(np.sum(np.abs(w.conj().T @ g) ** 2))
    return moments.var(hypothesis) * signal + sigma_eps_sq * float(np.vdot(g, g).real) + sigma_eta_sq
