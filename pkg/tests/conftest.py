import numpy as np
import pytest

from collabradar.experiments import build_scenario, identity_spec, standard_spec
from collabradar.model import NoiseModel, SubspaceModel, SystemConfig, Topology


@pytest.fixture(scope="session")
def std():
    return build_scenario(standard_spec())


@pytest.fixture(scope="session")
def identity():
    return build_scenario(identity_spec())


def random_unitary_columns(rng, n, d):
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    q, _ = np.linalg.qr(z)
    return q


def random_pd(rng, n, floor=0.5):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return z @ z.conj().T / n + floor * np.eye(n)


def random_models(rng, n=6, d=3, l=3, m=2, alphabet="gaussian"):
    """Small random valid (config, subspace, noise) triple."""
    cfg = SystemConfig(
        n_samples=n, subspace_dim=d, n_receivers=l, n_transmitters=m,
        sigma_alpha_sq=float(rng.uniform(0.5, 2)), mu_beta=complex(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)),
        sigma_beta_sq=float(rng.uniform(0.2, 1.5)), mac_gain=(1.0,) * m, seed=int(rng.integers(1 << 30)),
    )
    sym = random_pd(rng, d, floor=0.1)
    sub = SubspaceModel(random_unitary_columns(rng, n, d), sym, alphabet)
    noise = NoiseModel.from_covariances(random_pd(rng, n), random_pd(rng, n))
    return cfg, sub, noise


def random_topology(rng, m, l):
    a = (rng.random((m, l)) < 0.5).astype(int)
    a[np.arange(m), np.arange(m)] = 1
    return Topology(a)


def random_feasible_w(rng, topo, p_w=1.0):
    w = np.zeros((topo.m, topo.l), dtype=complex)
    vals = rng.standard_normal(topo.n_w) + 1j * rng.standard_normal(topo.n_w)
    vals *= np.sqrt(p_w) / np.linalg.norm(vals)
    w[topo.rows, topo.cols] = vals
    return w


ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
