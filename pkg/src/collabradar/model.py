"""Domain types, validation and random-stream management."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigurationError",
    "Alphabet",
    "Hypothesis",
    "SystemConfig",
    "SubspaceModel",
    "NoiseModel",
    "Topology",
    "validate_config",
    "derive_stream",
    "complex_normal",
    "hermitian_sqrt",
    "hermitian_inv_sqrt",
]

EIG_FLOOR = 1e-12
_MASK64 = (1 << 64) - 1


class ConfigurationError(ValueError):
    """Raised when model inputs are inconsistent or numerically unusable."""


class Alphabet(str, enum.Enum):
    GAUSSIAN = "gaussian"
    QPSK = "qpsk"


class Hypothesis(enum.IntEnum):
    H0 = 0
    H1 = 1


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _complex_to_list(z):
    z = complex(z)
    return [z.real, z.imag]


def _complex_from(v, name):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigurationError(f"{name}: complex values are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex)) and not isinstance(v, bool):
        return complex(v)
    raise ConfigurationError(f"{name}: expected a number or [re, im], got {v!r}")


@dataclass(frozen=True)
class SystemConfig:
    n_samples: int = 128
    subspace_dim: int = 32
    n_receivers: int = 8
    n_transmitters: int = 5
    sigma_alpha_sq: float = 1.0
    mu_beta: complex = 1.0
    sigma_beta_sq: float = 1.0
    sigma_eps_sq: float = 1.0
    sigma_eta_sq: float = 1.0
    power_budget: float = 1.0
    sigma_in_sq: float = 2.0
    sigma_out_sq: float = 1.0
    mac_gain: tuple = field(default_factory=lambda: (1.0,) * 5)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mac_gain", tuple(complex(g) for g in self.mac_gain))
        object.__setattr__(self, "mu_beta", complex(self.mu_beta))

    @property
    def gains(self) -> np.ndarray:
        return np.asarray(self.mac_gain, dtype=complex)

    @property
    def beta_power(self) -> float:
        """E|beta|^2 = |mu_beta|^2 + sigma_beta^2."""
        return abs(self.mu_beta) ** 2 + self.sigma_beta_sq

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def problems(self) -> list[str]:
        out = []
        for name in ("n_samples", "subspace_dim", "n_receivers", "n_transmitters"):
            if int(getattr(self, name)) < 1:
                out.append(f"{name} must be a positive integer")
        if self.subspace_dim > self.n_samples:
            out.append("subspace_dim exceeds n_samples")
        if self.n_transmitters > self.n_receivers:
            out.append("n_transmitters exceeds n_receivers")
        for name in ("sigma_alpha_sq", "sigma_beta_sq", "sigma_eps_sq", "sigma_eta_sq"):
            if getattr(self, name) < 0:
                out.append(f"{name} must be nonnegative")
        for name in ("power_budget", "sigma_in_sq", "sigma_out_sq"):
            if getattr(self, name) <= 0:
                out.append(f"{name} must be positive")
        if len(self.mac_gain) != self.n_transmitters:
            out.append(
                f"mac_gain has {len(self.mac_gain)} entries, expected n_transmitters={self.n_transmitters}"
            )
        return out

    def to_dict(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "mu_beta":
                v = _complex_to_list(v)
            elif f.name == "mac_gain":
                v = [_complex_to_list(g) for g in v]
            d[f.name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigurationError(f"config: unknown field(s) {sorted(unknown)}")
        kw = {}
        for name, v in d.items():
            try:
                if name == "mu_beta":
                    kw[name] = _complex_from(v, name)
                elif name == "mac_gain":
                    if not isinstance(v, (list, tuple)):
                        raise ConfigurationError("mac_gain: expected a list")
                    kw[name] = tuple(_complex_from(g, f"mac_gain[{k}]") for k, g in enumerate(v))
                elif name in ("n_samples", "subspace_dim", "n_receivers", "n_transmitters", "seed"):
                    if isinstance(v, bool) or int(v) != v:
                        raise ConfigurationError(f"{name}: expected an integer, got {v!r}")
                    kw[name] = int(v)
                else:
                    if isinstance(v, bool):
                        raise ConfigurationError(f"{name}: expected a real number, got {v!r}")
                    kw[name] = float(v)
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ConfigurationError):
                    raise
                raise ConfigurationError(f"{name}: invalid value {v!r}") from exc
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class SubspaceModel:
    basis: np.ndarray
    symbol_cov: np.ndarray
    alphabet: Alphabet = Alphabet.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "basis", _frozen(self.basis))
        object.__setattr__(self, "symbol_cov", _frozen(self.symbol_cov))
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def waveform_cov(self) -> np.ndarray:
        """U Sigma_theta U^H."""
        return self.basis @ self.symbol_cov @ self.basis.conj().T

    def with_alphabet(self, alphabet) -> "SubspaceModel":
        return SubspaceModel(self.basis, self.symbol_cov, Alphabet(alphabet))

    def problems(self, tol=1e-10) -> list[str]:
        out = []
        d = self.d
        if self.symbol_cov.shape != (d, d):
            out.append(f"symbol_cov has shape {self.symbol_cov.shape}, expected ({d}, {d})")
            return out
        gram = self.basis.conj().T @ self.basis
        if np.max(np.abs(gram - np.eye(d))) > tol:
            out.append("subspace basis columns are not orthonormal")
        if np.max(np.abs(self.symbol_cov - self.symbol_cov.conj().T)) > tol:
            out.append("symbol_cov is not Hermitian")
        elif np.linalg.eigvalsh(self.symbol_cov).min() < -tol * max(1.0, np.abs(self.symbol_cov).max()):
            out.append("symbol_cov is not positive semidefinite")
        return out


def _eigh_checked(cov, name):
    cov = np.asarray(cov, dtype=complex)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ConfigurationError(f"{name}: expected a square matrix, got shape {cov.shape}")
    if np.max(np.abs(cov - cov.conj().T)) > 1e-10 * max(1.0, np.abs(cov).max()):
        raise ConfigurationError(f"{name}: matrix is not Hermitian")
    w, v = np.linalg.eigh(cov)
    if w.max() <= 0 or w.min() < EIG_FLOOR * w.max():
        raise ConfigurationError(
            f"{name}: matrix is not positive definite (eigenvalue range [{w.min():.3g}, {w.max():.3g}])"
        )
    return w, v


def hermitian_sqrt(cov, name="matrix"):
    w, v = _eigh_checked(cov, name)
    return (v * np.sqrt(w)) @ v.conj().T


def hermitian_inv_sqrt(cov, name="matrix"):
    """Inverse square root of a Hermitian PD matrix via eigendecomposition."""
    w, v = _eigh_checked(cov, name)
    return (v / np.sqrt(w)) @ v.conj().T


def psd_sqrt(cov):
    """Square root of a Hermitian PSD matrix; tiny negative eigenvalues are clipped."""
    w, v = np.linalg.eigh(np.asarray(cov, dtype=complex))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


@dataclass(frozen=True, eq=False)
class NoiseModel:
    cov_ref: np.ndarray
    cov_surv: np.ndarray
    inv_sqrt_ref: np.ndarray
    inv_sqrt_surv: np.ndarray
    sqrt_ref: np.ndarray
    sqrt_surv: np.ndarray

    def __post_init__(self):
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, _frozen(getattr(self, f.name)))

    @classmethod
    def from_covariances(cls, cov_ref, cov_surv, inv_sqrt_ref=None, inv_sqrt_surv=None):
        if inv_sqrt_ref is None:
            inv_sqrt_ref = hermitian_inv_sqrt(cov_ref, "reference-channel covariance")
        if inv_sqrt_surv is None:
            inv_sqrt_surv = hermitian_inv_sqrt(cov_surv, "surveillance-channel covariance")
        return cls(
            cov_ref,
            cov_surv,
            inv_sqrt_ref,
            inv_sqrt_surv,
            hermitian_sqrt(cov_ref, "reference-channel covariance"),
            hermitian_sqrt(cov_surv, "surveillance-channel covariance"),
        )

    @property
    def n(self) -> int:
        return self.cov_ref.shape[0]

    def problems(self, tol=1e-8) -> list[str]:
        out = []
        n = self.n
        for tag, cov, isq in (
            ("ref", self.cov_ref, self.inv_sqrt_ref),
            ("surv", self.cov_surv, self.inv_sqrt_surv),
        ):
            if cov.shape != (n, n) or isq.shape != (n, n):
                out.append(f"noise {tag}: shape mismatch")
                continue
            if np.max(np.abs(isq @ cov @ isq - np.eye(n))) > tol:
                out.append(f"noise {tag}: inverse square root does not whiten the covariance")
        return out


@dataclass(frozen=True, eq=False)
class Topology:
    """Binary M x L communication matrix plus its column-major nonzero map.

    Row ``i`` is transmitter ``i``; ``tx_columns[i]`` is the index of that
    transmitter's own CC statistic (defaults to ``i``).
    """

    adjacency: np.ndarray
    tx_columns: tuple = None
    nonzero_index_map: tuple = field(init=False)

    def __post_init__(self):
        a = np.array(self.adjacency)
        if a.ndim != 2:
            raise ConfigurationError(f"adjacency must be a matrix, got shape {a.shape}")
        if not np.all((a == 0) | (a == 1)):
            raise ConfigurationError("adjacency must be binary")
        a = _frozen(a, dtype=np.int8)
        object.__setattr__(self, "adjacency", a)
        cols = tuple(range(a.shape[0])) if self.tx_columns is None else tuple(int(c) for c in self.tx_columns)
        object.__setattr__(self, "tx_columns", cols)
        # column-major traversal: within a column, increasing row
        cc, rr = np.nonzero(a.T)
        object.__setattr__(self, "nonzero_index_map", tuple(zip(rr.tolist(), cc.tolist())))

    @property
    def m(self) -> int:
        return self.adjacency.shape[0]

    @property
    def l(self) -> int:
        return self.adjacency.shape[1]

    @property
    def n_w(self) -> int:
        return len(self.nonzero_index_map)

    @property
    def rows(self) -> np.ndarray:
        return np.array([i for i, _ in self.nonzero_index_map], dtype=int)

    @property
    def cols(self) -> np.ndarray:
        return np.array([j for _, j in self.nonzero_index_map], dtype=int)

    def problems(self) -> list[str]:
        out = []
        if len(self.tx_columns) != self.m:
            out.append("tx_columns must list one column per transmitter row")
            return out
        for i, j in enumerate(self.tx_columns):
            if not 0 <= j < self.l:
                out.append(f"transmitter {i}: own column {j} out of range")
            elif self.adjacency[i, j] != 1:
                out.append(f"self-loop missing: adjacency[{i}, {j}] must be 1 for transmitting receiver {i}")
        if len(set(self.tx_columns)) != len(self.tx_columns):
            out.append("tx_columns must be distinct")
        return out


def validate_config(cfg: SystemConfig, sub: SubspaceModel, noise: NoiseModel, topo: Topology) -> list[str]:
    """Return every violated invariant; an empty list means the inputs are consistent."""
    report = list(cfg.problems())
    n, d = cfg.n_samples, cfg.subspace_dim
    if sub.basis.shape != (n, d):
        report.append(f"subspace basis has shape {sub.basis.shape}, expected ({n}, {d})")
    else:
        report.extend(sub.problems())
    if sub.alphabet is Alphabet.QPSK and sub.symbol_cov.shape == (d, d):
        if np.any(np.abs(sub.symbol_cov - np.diag(np.diag(sub.symbol_cov))) > 0):
            report.append("QPSK symbols require a diagonal symbol_cov")
    if noise.cov_ref.shape != (n, n) or noise.cov_surv.shape != (n, n):
        report.append(f"noise covariances must be ({n}, {n})")
    else:
        report.extend(noise.problems())
    if topo.adjacency.shape != (cfg.n_transmitters, cfg.n_receivers):
        report.append(
            f"adjacency has shape {topo.adjacency.shape}, expected ({cfg.n_transmitters}, {cfg.n_receivers})"
        )
    report.extend(topo.problems())
    return report


def derive_stream(seed: int, trial: int, channel_tag: int) -> np.random.Generator:
    """Independent generator for one (seed, trial, tag) triple."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, int(trial) & _MASK64, int(channel_tag) & _MASK64])
    return np.random.Generator(np.random.PCG64(ss))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard proper complex normal: real and imaginary parts each N(0, 1/2)."""
    out = np.empty(shape, dtype=complex)
    v = out.view(np.float64)
    v[...] = rng.standard_normal(v.shape)
    out *= np.sqrt(0.5)
    return out
