"""Experiment specifications, object generators and the standard-setup presets."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .model import (
    Alphabet,
    ConfigurationError,
    NoiseModel,
    SubspaceModel,
    SystemConfig,
    Topology,
    derive_stream,
    hermitian_inv_sqrt,
    validate_config,
)
from .subspace import CcKernel, build_kernel

__all__ = [
    "ExperimentSpec",
    "Scenario",
    "generate_subspace",
    "generate_noise",
    "generate_topology",
    "build_scenario",
    "standard_spec",
    "identity_spec",
    "load_spec",
    "dump_spec",
    "RUN_MODES",
]

SUBSPACE_TAG = 1_000
RUN_MODES = ("validate_config", "validate_moments", "design_weights", "roc", "reproduce")
SUBSPACE_KINDS = ("dft_random_columns", "identity", "file")
NOISE_KINDS = ("structured", "identity", "file")
TOPOLOGY_KINDS = ("ring", "file")
BASELINES = ("af", "whitening")


def _load_array(path, base=None, name="array"):
    p = Path(path)
    if base is not None and not p.is_absolute():
        p = Path(base) / p
    if not p.exists():
        raise ConfigurationError(f"{name}: file not found: {p}")
    if p.suffix == ".npy":
        return np.load(p)
    return np.loadtxt(p, delimiter="," if p.suffix == ".csv" else None, dtype=complex)


def _dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def generate_subspace(directive: dict, n: int, d: int, rng, base_dir=None) -> SubspaceModel:
    """Basis U (N x D) with orthonormal columns plus the symbol model.

    ``directive['alphabet']`` selects QPSK or Gaussian symbols (default QPSK);
    the symbol covariance is the identity unless ``symbol_cov_path`` is given.
    """
    kind = directive.get("kind", "dft_random_columns")
    if d > n:
        raise ConfigurationError(f"subspace: dimension {d} exceeds n_samples {n}")
    if kind == "dft_random_columns":
        count = int(directive.get("count", d))
        if count != d:
            raise ConfigurationError(f"subspace.count = {count} disagrees with subspace_dim = {d}")
        cols = np.sort(rng.choice(n, size=d, replace=False))
        basis = _dft_matrix(n)[:, cols]
    elif kind == "identity":
        basis = np.eye(n, d, dtype=complex)
    elif kind == "file":
        basis = _load_array(directive["path"], base_dir, "subspace.path")
    else:
        raise ConfigurationError(f"subspace.kind: unknown value {kind!r}; expected one of {SUBSPACE_KINDS}")
    if "symbol_cov_path" in directive:
        sym = _load_array(directive["symbol_cov_path"], base_dir, "subspace.symbol_cov_path")
    else:
        sym = np.eye(d, dtype=complex)
    return SubspaceModel(basis, sym, Alphabet(directive.get("alphabet", "qpsk")))


def structured_covariance(sub: SubspaceModel, sigma_in_sq, sigma_out_sq):
    """sigma_out^2 (I - U U^H) + sigma_in^2 U U^H and its closed-form inverse square root."""
    p = sub.basis @ sub.basis.conj().T
    q = np.eye(sub.n) - p
    cov = sigma_out_sq * q + sigma_in_sq * p
    inv_sqrt = q / np.sqrt(sigma_out_sq) + p / np.sqrt(sigma_in_sq)
    return cov, inv_sqrt


def generate_noise(directive: dict, sub: SubspaceModel, n: int, cfg: SystemConfig | None = None,
                   base_dir=None) -> NoiseModel:
    kind = directive.get("kind", "structured")
    if kind == "structured":
        s_in = directive.get("sigma_in_sq", cfg.sigma_in_sq if cfg else None)
        s_out = directive.get("sigma_out_sq", cfg.sigma_out_sq if cfg else None)
        if s_in is None or s_out is None:
            raise ConfigurationError("noise: structured mode needs sigma_in_sq and sigma_out_sq")
        if not (s_in > 0 and s_out > 0):
            raise ConfigurationError("noise: sigma_in_sq and sigma_out_sq must be positive")
        cov, inv_sqrt = structured_covariance(sub, s_in, s_out)
        check = hermitian_inv_sqrt(cov, "structured covariance")
        if np.max(np.abs(check - inv_sqrt)) > 1e-10 * max(1.0, np.abs(inv_sqrt).max()):
            raise ConfigurationError("noise: closed-form inverse square root disagrees with eigendecomposition")
        return NoiseModel.from_covariances(cov, cov, inv_sqrt, inv_sqrt)
    if kind == "identity":
        eye = np.eye(n, dtype=complex)
        return NoiseModel.from_covariances(eye, eye, eye, eye)
    if kind == "file":
        cov_r = _load_array(directive["ref_path"], base_dir, "noise.ref_path")
        cov_s = _load_array(directive.get("surv_path", directive["ref_path"]), base_dir, "noise.surv_path")
        return NoiseModel.from_covariances(cov_r, cov_s)
    raise ConfigurationError(f"noise.kind: unknown value {kind!r}; expected one of {NOISE_KINDS}")


def generate_topology(directive: dict, m: int, l: int, base_dir=None) -> Topology:
    """Ring topology: transmitter i listens to itself and the next k receivers (mod L)."""
    kind = directive.get("kind", "ring")
    if kind == "ring":
        k = int(directive.get("neighbors_per_tx", 3))
        if not 0 <= k <= l - 1:
            raise ConfigurationError(f"topology.neighbors_per_tx = {k} out of range [0, {l - 1}]")
        if m > l:
            raise ConfigurationError("topology: more transmitters than receivers")
        a = np.zeros((m, l), dtype=np.int8)
        for i in range(m):
            a[i, [(i + s) % l for s in range(k + 1)]] = 1
        return Topology(a)
    if kind == "file":
        a = np.real(_load_array(directive["path"], base_dir, "topology.path")).astype(int)
        return Topology(a, directive.get("tx_columns"))
    raise ConfigurationError(f"topology.kind: unknown value {kind!r}; expected one of {TOPOLOGY_KINDS}")


@dataclass
class ExperimentSpec:
    config: SystemConfig = field(default_factory=SystemConfig)
    subspace: dict = field(default_factory=lambda: {"kind": "dft_random_columns", "count": 32, "alphabet": "qpsk"})
    noise: dict = field(default_factory=lambda: {"kind": "structured"})
    topology: dict = field(default_factory=lambda: {"kind": "ring", "neighbors_per_tx": 3})
    run: dict = field(default_factory=lambda: {"mode": "roc", "n_trials": 20000, "baselines": ["af"]})
    base_dir: str | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "subspace": copy.deepcopy(self.subspace),
            "noise": copy.deepcopy(self.noise),
            "topology": copy.deepcopy(self.topology),
            "run": copy.deepcopy(self.run),
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ExperimentSpec":
        if not isinstance(d, dict):
            raise ConfigurationError("spec: top level must be a mapping")
        unknown = set(d) - {"config", "subspace", "noise", "topology", "run"}
        if unknown:
            raise ConfigurationError(f"spec: unknown section(s) {sorted(unknown)}")
        if "config" not in d:
            raise ConfigurationError("config: section is required")
        if not isinstance(d["config"], dict):
            raise ConfigurationError("config: expected a mapping")
        spec = cls(config=SystemConfig.from_dict(d["config"]), base_dir=base_dir)
        for name in ("subspace", "noise", "topology", "run"):
            if name in d:
                if not isinstance(d[name], dict):
                    raise ConfigurationError(f"{name}: expected a mapping")
                setattr(spec, name, copy.deepcopy(d[name]))
        spec.check()
        return spec

    def check(self):
        if self.subspace.get("kind", "dft_random_columns") not in SUBSPACE_KINDS:
            raise ConfigurationError(f"subspace.kind: expected one of {SUBSPACE_KINDS}")
        if self.subspace.get("alphabet", "qpsk") not in [a.value for a in Alphabet]:
            raise ConfigurationError("subspace.alphabet: expected 'qpsk' or 'gaussian'")
        if self.noise.get("kind", "structured") not in NOISE_KINDS:
            raise ConfigurationError(f"noise.kind: expected one of {NOISE_KINDS}")
        if self.topology.get("kind", "ring") not in TOPOLOGY_KINDS:
            raise ConfigurationError(f"topology.kind: expected one of {TOPOLOGY_KINDS}")
        mode = self.run.get("mode", "roc")
        if mode not in RUN_MODES:
            raise ConfigurationError(f"run.mode: unknown value {mode!r}; expected one of {RUN_MODES}")
        bl = self.run.get("baselines", [])
        if not isinstance(bl, list) or any(b not in BASELINES for b in bl):
            raise ConfigurationError(f"run.baselines: expected a list drawn from {BASELINES}")
        n = self.run.get("n_trials", 1)
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigurationError("run.n_trials: expected a positive integer")
        if mode == "reproduce" and self.run.get("figure", 2) not in (2, 3):
            raise ConfigurationError("run.figure: expected 2 or 3")

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_spec(path) -> ExperimentSpec:
    p = Path(path)
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{p}: not valid YAML ({exc})") from exc
    return ExperimentSpec.from_dict(data, base_dir=str(p.parent))


def dump_spec(spec: ExperimentSpec, path=None) -> str:
    text = yaml.safe_dump(spec.to_dict(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text


@dataclass(frozen=True, eq=False)
class Scenario:
    cfg: SystemConfig
    sub: SubspaceModel
    noise: NoiseModel
    topo: Topology
    kernel: CcKernel


def build_scenario(spec: ExperimentSpec) -> Scenario:
    cfg = spec.config
    sub = generate_subspace(spec.subspace, cfg.n_samples, cfg.subspace_dim,
                            derive_stream(cfg.seed, 0, SUBSPACE_TAG), spec.base_dir)
    noise = generate_noise(spec.noise, sub, cfg.n_samples, cfg, spec.base_dir)
    topo = generate_topology(spec.topology, cfg.n_transmitters, cfg.n_receivers, spec.base_dir)
    problems = validate_config(cfg, sub, noise, topo)
    if problems:
        raise ConfigurationError("; ".join(problems))
    return Scenario(cfg, sub, noise, topo, build_kernel(sub, noise))


def standard_spec(g_amp=1.0, sigma_alpha_sq=1.0, seed=2024, **run) -> ExperimentSpec:
    """N=128, D=32 DFT subspace, structured noise (1, 2), L=8, M=5, 3 ring neighbours."""
    cfg = SystemConfig(
        n_samples=128, subspace_dim=32, n_receivers=8, n_transmitters=5,
        sigma_alpha_sq=sigma_alpha_sq, mu_beta=1.0, sigma_beta_sq=1.0,
        sigma_eps_sq=1.0, sigma_eta_sq=1.0, power_budget=1.0,
        sigma_in_sq=2.0, sigma_out_sq=1.0, mac_gain=(g_amp,) * 5, seed=seed,
    )
    spec = ExperimentSpec(config=cfg)
    if run:
        spec.run = dict(run)
    return spec


def identity_spec(n=32, seed=2024, **run) -> ExperimentSpec:
    """D = N, U = I, all covariances I, Gaussian symbols."""
    cfg = SystemConfig(
        n_samples=n, subspace_dim=n, n_receivers=8, n_transmitters=5,
        sigma_alpha_sq=1.0, mu_beta=1.0, sigma_beta_sq=1.0, sigma_eps_sq=1.0, sigma_eta_sq=1.0,
        power_budget=1.0, sigma_in_sq=1.0, sigma_out_sq=1.0, mac_gain=(1.0,) * 5, seed=seed,
    )
    spec = ExperimentSpec(config=cfg, subspace={"kind": "identity", "alphabet": "gaussian"},
                          noise={"kind": "identity"})
    if run:
        spec.run = dict(run)
    return spec
