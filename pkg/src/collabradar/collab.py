"""Topology-constrained collaboration weights and their optimal design."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import ConfigurationError, SystemConfig, Topology
from .moments import CcMoments, check_mask, fused_variance

__all__ = [
    "CollabDesign",
    "DegenerateGainsError",
    "EqualVarianceWarning",
    "vectorize",
    "scatter",
    "build_g_matrix",
    "variance_ratio",
    "optimal_ratio",
    "design_weights",
    "design_from_matrix",
    "af_baseline",
    "gamma_lambda_max",
]


class DegenerateGainsError(ConfigurationError):
    pass


class EqualVarianceWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class CollabDesign:
    """A collaboration matrix together with the quantities it was built from.

    Vectorization convention: ``w_vec[l] = conj(W[i_l, j_l])`` and
    ``G[l, j_l] = conj(g[i_l])``; with these, ``g^H W == w^H G`` and
    ``||w||^2 == tr(W W^H)`` hold for complex gains.
    """

    w_vec: np.ndarray
    w_matrix: np.ndarray
    g_matrix: np.ndarray
    gamma: np.ndarray
    ratio: float
    topology: Topology
    gains: np.ndarray
    sigma_eps_sq: float
    sigma_eta_sq: float
    power_budget: float
    kind: str = "collab"
    lambda_max: float = float("nan")
    multiplicity: int = 0
    notes: tuple = field(default_factory=tuple)

    @property
    def omega(self) -> float:
        return self.sigma_eps_sq * float(np.vdot(self.gains, self.gains).real) + self.sigma_eta_sq

    def fused_variance(self, moments: CcMoments, hypothesis) -> float:
        return fused_variance(
            self.w_matrix, moments, hypothesis, self.gains, self.sigma_eps_sq, self.sigma_eta_sq,
            self.topology.adjacency,
        )

    def report(self) -> dict:
        return {
            "kind": self.kind,
            "w_vec": [[z.real, z.imag] for z in self.w_vec.tolist()],
            "w_matrix": [[[z.real, z.imag] for z in row] for row in self.w_matrix.tolist()],
            "index_map": [list(p) for p in self.topology.nonzero_index_map],
            "ratio": self.ratio,
            "lambda_max_gamma": self.lambda_max,
            "lambda_max_multiplicity": self.multiplicity,
            "power": float(np.vdot(self.w_vec, self.w_vec).real),
            "omega": self.omega,
            "conventions": {
                "w_vec": "w[l] = conj(W[i_l, j_l]), column-major over nonzeros of A",
                "g_matrix": "G[l, j_l] = conj(g[i_l])",
                "phase": "largest-magnitude entry of w is real positive",
            },
            "notes": list(self.notes),
        }


def vectorize(w_matrix, topo: Topology) -> np.ndarray:
    w = np.asarray(w_matrix, dtype=complex)
    return np.conj(w[topo.rows, topo.cols])


def scatter(w_vec, topo: Topology) -> np.ndarray:
    w = np.zeros((topo.m, topo.l), dtype=complex)
    w[topo.rows, topo.cols] = np.conj(np.asarray(w_vec, dtype=complex))
    return w


def build_g_matrix(topo: Topology, g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.shape != (topo.m,):
        raise ConfigurationError(f"gain vector has shape {g.shape}, expected ({topo.m},)")
    out = np.zeros((topo.n_w, topo.l), dtype=complex)
    out[np.arange(topo.n_w), topo.cols] = np.conj(g[topo.rows])
    return out


def gamma_lambda_max(topo: Topology, g) -> float:
    """Top eigenvalue of Gamma from its block structure: max over columns of the gain mass."""
    g2 = np.abs(np.asarray(g)) ** 2
    mass = (np.asarray(topo.adjacency) * g2[:, None]).sum(axis=0)
    return float(mass.max())


def variance_ratio(w_vec, gamma, moments: CcMoments, omega: float, p_w: float, tol=1e-8) -> float:
    w = np.asarray(w_vec, dtype=complex)
    power = float(np.vdot(w, w).real)
    if abs(power - p_w) > tol * max(1.0, p_w):
        raise ValueError(f"power constraint violated: ||w||^2 = {power:.12g}, expected {p_w:.12g}")
    if not omega > 0:
        raise ValueError("omega must be positive")
    q = float(np.vdot(w, np.asarray(gamma) @ w).real)
    return (moments.var_h1 * q + omega) / (moments.var_h0 * q + omega)


def optimal_ratio(lambda_max: float, moments: CcMoments, omega: float, p_w: float) -> float:
    return (moments.var_h1 * lambda_max + omega / p_w) / (moments.var_h0 * lambda_max + omega / p_w)


def _fix_phase(v):
    k = int(np.argmax(np.abs(v)))
    return v * (np.abs(v[k]) / v[k])


def design_weights(topo: Topology, g, moments: CcMoments, sigma_eps_sq, sigma_eta_sq, p_w) -> CollabDesign:
    """Maximize the H1/H0 variance ratio of z under tr(W W^H) = p_w.

    Solves Omega_1 w = lambda Omega_0 w by Cholesky reduction of Omega_0.
    """
    g = np.asarray(g, dtype=complex)
    gm = build_g_matrix(topo, g)
    gamma = gm @ gm.conj().T
    if not np.any(np.abs(gamma) > 0):
        raise DegenerateGainsError("degenerate MAC gains: Gamma = G G^H is zero")
    omega = sigma_eps_sq * float(np.vdot(g, g).real) + sigma_eta_sq
    if not omega > 0:
        raise ConfigurationError("omega = sigma_eps^2 ||g||^2 + sigma_eta^2 must be positive")
    notes = []
    if not moments.var_h1 > moments.var_h0:
        warnings.warn("var_h1 == var_h0: every feasible w is optimal", EqualVarianceWarning, stacklevel=2)
        notes.append("equal hypothesis variances; returned w is arbitrary")
    eye = np.eye(topo.n_w)
    om0 = moments.var_h0 * gamma + (omega / p_w) * eye
    om1 = moments.var_h1 * gamma + (omega / p_w) * eye
    s = scipy.linalg.cholesky(om0, lower=True)
    tmp = scipy.linalg.solve_triangular(s, om1, lower=True)
    red = scipy.linalg.solve_triangular(s, tmp.conj().T, lower=True).conj().T
    red = 0.5 * (red + red.conj().T)
    lam, vec = np.linalg.eigh(red)
    top = lam[-1]
    tied = np.flatnonzero(lam >= top - 1e-10 * max(1.0, abs(top)))
    v = scipy.linalg.solve_triangular(s.conj().T, vec[:, tied[0]], lower=False)
    v = _fix_phase(v / np.linalg.norm(v))
    w = np.sqrt(p_w) * v
    gam_eigs = np.linalg.eigvalsh(gamma)
    lmax = float(gam_eigs[-1])
    mult = int(np.sum(gam_eigs >= lmax - 1e-10 * max(1.0, lmax)))
    if mult > 1:
        notes.append(f"top eigenvalue of Gamma has multiplicity {mult}; first solver eigenvector kept")
    return CollabDesign(
        w_vec=w,
        w_matrix=scatter(w, topo),
        g_matrix=gm,
        gamma=gamma,
        ratio=float(top),
        topology=topo,
        gains=g,
        sigma_eps_sq=float(sigma_eps_sq),
        sigma_eta_sq=float(sigma_eta_sq),
        power_budget=float(p_w),
        lambda_max=lmax,
        multiplicity=mult,
        notes=tuple(notes),
    )


def design_from_matrix(w_matrix, topo: Topology, g, moments: CcMoments, sigma_eps_sq, sigma_eta_sq,
                       kind="custom") -> CollabDesign:
    """Wrap an arbitrary mask-feasible W as a design record."""
    w_matrix = np.asarray(w_matrix, dtype=complex)
    check_mask(w_matrix, topo.adjacency)
    g = np.asarray(g, dtype=complex)
    gm = build_g_matrix(topo, g)
    gamma = gm @ gm.conj().T
    w = vectorize(w_matrix, topo)
    p_w = float(np.vdot(w, w).real)
    omega = sigma_eps_sq * float(np.vdot(g, g).real) + sigma_eta_sq
    ratio = variance_ratio(w, gamma, moments, omega, p_w) if omega > 0 and p_w > 0 else float("nan")
    return CollabDesign(
        w_vec=w, w_matrix=w_matrix, g_matrix=gm, gamma=gamma, ratio=ratio, topology=topo, gains=g,
        sigma_eps_sq=float(sigma_eps_sq), sigma_eta_sq=float(sigma_eta_sq), power_budget=p_w,
        kind=kind, lambda_max=float(np.linalg.eigvalsh(gamma)[-1]),
    )


def af_baseline(cfg: SystemConfig, moments: CcMoments, g_af=None) -> CollabDesign:
    """Amplify-and-forward: all L receivers send their own scaled c_i, no collaboration noise.

    ``g_af`` defaults to the common value of ``cfg.mac_gain`` repeated L times
    and is required when the configured gains are not all equal.
    """
    l = cfg.n_receivers
    if g_af is None:
        gains = cfg.gains
        if gains.size == 0 or np.any(gains != gains[0]):
            raise ConfigurationError("af_baseline needs explicit g_af when mac_gain entries differ")
        g_af = np.full(l, gains[0])
    g_af = np.asarray(g_af, dtype=complex)
    topo = Topology(np.eye(l, dtype=np.int8))
    w = np.sqrt(cfg.power_budget / l) * np.eye(l, dtype=complex)
    d = design_from_matrix(w, topo, g_af, moments, 0.0, cfg.sigma_eta_sq, kind="af")
    return d
