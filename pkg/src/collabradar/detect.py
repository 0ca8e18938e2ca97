"""Collaboration, MAC fusion, energy detection and empirical ROC estimation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import Hypothesis, complex_normal, derive_stream
from .montecarlo import pipeline_samples
from .subspace import whitening_only_cc

__all__ = [
    "FusedSample",
    "RocCurve",
    "collaborate",
    "fuse",
    "calibrate_threshold",
    "empirical_roc",
    "auc_from_scores",
    "bootstrap_auc_ci",
    "estimate_roc",
    "estimate_rocs",
    "roc_from_energies",
    "whitening_only_cc",
    "DetectionWarning",
]


class DetectionWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class FusedSample:
    z: np.ndarray
    energy: np.ndarray
    hypothesis: Hypothesis | None = None


@dataclass(frozen=True, eq=False)
class RocCurve:
    pfa: np.ndarray
    pd: np.ndarray
    auc: float
    n_trials: int
    ci: tuple = (float("nan"), float("nan"))

    @property
    def points(self):
        return list(zip(self.pfa.tolist(), self.pd.tolist()))

    def to_csv(self, path, header_comment=None):
        with open(path, "w") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write("pfa,pd\n")
            for a, b in zip(self.pfa, self.pd):
                fh.write(f"{float(a)!r},{float(b)!r}\n")


def collaborate(design, c, rng) -> np.ndarray:
    """y = W c + eps, with eps ~ CN(0, sigma_eps^2 I); ``c`` may be row-stacked."""
    c = np.asarray(c, dtype=complex)
    y = c @ design.w_matrix.T
    if design.sigma_eps_sq > 0:
        y = y + np.sqrt(design.sigma_eps_sq) * complex_normal(rng, y.shape)
    return y


def fuse(g, y, sigma_eta_sq, rng, hypothesis=None) -> FusedSample:
    """z = g^H y + eta over the trailing axis of ``y``."""
    g = np.asarray(g, dtype=complex)
    y = np.asarray(y, dtype=complex)
    z = y @ g.conj()
    if sigma_eta_sq > 0:
        z = z + np.sqrt(sigma_eta_sq) * complex_normal(rng, np.shape(z))
    return FusedSample(z, np.abs(z) ** 2, hypothesis)


def calibrate_threshold(h0_energies, target_pfa: float) -> float:
    """Smallest H0 sample ``tau`` with empirical P(|z|^2 >= tau) <= target_pfa.

    Detection is declared when ``energy >= tau``.
    """
    e = np.sort(np.asarray(h0_energies, dtype=float))
    n = e.size
    if n == 0:
        raise ValueError("calibrate_threshold: no H0 samples")
    if not 0 < target_pfa < 1:
        raise ValueError("target_pfa must lie in (0, 1)")
    if n < 1.0 / target_pfa:
        warnings.warn(f"only {n} H0 samples for target P_FA {target_pfa}", DetectionWarning, stacklevel=2)
    if e[0] == e[-1]:
        warnings.warn("H0 energies are constant: achievable P_FA is only 0 or 1", DetectionWarning, stacklevel=2)
    # exceedance of each sample value: count of samples >= it
    exceed = n - np.searchsorted(e, e, side="left")
    ok = np.flatnonzero(exceed <= target_pfa * n * (1 + 1e-12))
    if ok.size == 0:
        return float(np.nextafter(e[-1], np.inf))
    return float(e[ok[0]])


def _groups(scores):
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    group = np.zeros(s.size, dtype=np.int_)
    if s.size:
        group[1:] = np.cumsum(s[1:] != s[:-1])
    return order, s, group


def empirical_roc(e0, e1):
    """Exact empirical ROC with every pooled energy as a threshold.

    Returns (pfa, pd) from (0, 0) to (1, 1); the rule is ``energy >= tau``.
    """
    e0 = np.sort(np.asarray(e0, dtype=float))
    e1 = np.sort(np.asarray(e1, dtype=float))
    thr = np.unique(np.concatenate([e0, e1]))[::-1]
    pfa = (e0.size - np.searchsorted(e0, thr, side="left")) / e0.size
    pd = (e1.size - np.searchsorted(e1, thr, side="left")) / e1.size
    return np.concatenate([[0.0], pfa]), np.concatenate([[0.0], pd])


def _labels(e0, e1):
    scores = np.concatenate([np.asarray(e0, float), np.asarray(e1, float)])
    label = np.concatenate([np.zeros(len(e0), np.uint8), np.ones(len(e1), np.uint8)])
    return scores, label


def auc_from_scores(e0, e1) -> float:
    scores, label = _labels(e0, e1)
    order, _, group = _groups(scores)
    return float(kernels.grouped_auc(group, label[order], np.ones(scores.size)))


def bootstrap_auc_ci(e0, e1, n_boot=1000, level=0.95, rng=None, chunk=50):
    """Percentile bootstrap CI for the AUC, resampling each class separately."""
    rng = np.random.default_rng(0) if rng is None else rng
    n0, n1 = len(e0), len(e1)
    scores, label = _labels(e0, e1)
    order, _, group = _groups(scores)
    lab = label[order]
    aucs = []
    for start in range(0, n_boot, chunk):
        k = min(chunk, n_boot - start)
        counts = np.zeros((k, n0 + n1))
        for row in range(k):
            counts[row, :n0] = np.bincount(rng.integers(0, n0, n0), minlength=n0)
            counts[row, n0:] = np.bincount(rng.integers(0, n1, n1), minlength=n1)
        aucs.append(kernels.bootstrap_auc(group, lab, np.ascontiguousarray(counts[:, order])))
    lo, hi = np.quantile(np.concatenate(aucs), [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def roc_from_energies(e0, e1, n_boot=1000, seed=0) -> RocCurve:
    pfa, pd = empirical_roc(e0, e1)
    auc = float(np.trapezoid(pd, pfa))
    ci = bootstrap_auc_ci(e0, e1, n_boot, rng=derive_stream(seed, 0, 99)) if n_boot else (np.nan, np.nan)
    return RocCurve(pfa, pd, auc, int(min(len(e0), len(e1))), ci)


def estimate_roc(cfg, sub, noise, kernel, design, n_trials, seed=None, method="subspace", n_boot=1000) -> RocCurve:
    """Full-pipeline ROC for one design with ``n_trials`` per hypothesis."""
    if n_trials < 1000:
        warnings.warn("fewer than 1000 trials per hypothesis", DetectionWarning, stacklevel=2)
    return estimate_rocs(cfg, sub, noise, kernel, {"d": design}, n_trials, seed, method, n_boot)["d"]


def estimate_rocs(cfg, sub, noise, kernel, designs: dict, n_trials, seed=None, method="subspace",
                  n_boot=1000) -> dict:
    """ROCs for several designs evaluated on common random draws."""
    seed = cfg.seed if seed is None else seed
    z = {h: pipeline_samples(cfg, sub, noise, designs, h, n_trials, seed, kernel, method) for h in Hypothesis}
    return {
        name: roc_from_energies(np.abs(z[Hypothesis.H0][name]) ** 2, np.abs(z[Hypothesis.H1][name]) ** 2,
                                n_boot, seed)
        for name in designs
    }

