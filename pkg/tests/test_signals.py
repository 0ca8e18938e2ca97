import numpy as np
import pytest

from collabradar.model import ConfigurationError, Hypothesis, NoiseModel, SubspaceModel, derive_stream
from collabradar.signals import draw_symbols, synthesize_batch, synthesize_trial, synthesize_waveform


def rng(k=0):
    return derive_stream(7, k, 0)


def test_qpsk_unit_modulus(std):
    th = draw_symbols(std.sub, rng(), 1000)
    np.testing.assert_allclose(np.abs(th), 1.0, atol=1e-15)


def test_qpsk_rejects_non_diagonal(std):
    sub = SubspaceModel(std.sub.basis, np.ones((32, 32)), "qpsk")
    with pytest.raises(ConfigurationError):
        draw_symbols(sub, rng())


def test_gaussian_zero_cov_gives_zero():
    sub = SubspaceModel(np.eye(4, 2), np.zeros((2, 2)))
    assert np.all(draw_symbols(sub, rng(), 10) == 0)


def test_gaussian_sample_covariance():
    sub = SubspaceModel(np.eye(6, 4), np.eye(4))
    th = draw_symbols(sub, rng(), 100_000)
    s = th.T @ th.conj() / th.shape[0]
    assert np.linalg.norm(s - np.eye(4)) / np.linalg.norm(np.eye(4)) < 0.03


def test_gaussian_non_identity_cov():
    c = np.array([[2.0, 0.5j], [-0.5j, 1.0]])
    th = draw_symbols(SubspaceModel(np.eye(3, 2), c), rng(), 200_000)
    s = th.T @ th.conj() / th.shape[0]
    assert np.linalg.norm(s - c) / np.linalg.norm(c) < 0.03


def test_waveform_in_subspace(std):
    x = synthesize_waveform(std.sub, rng(), 50)
    u = std.sub.basis
    resid = x - x @ (u @ u.conj().T).T
    assert np.max(np.abs(resid)) < 1e-10


def test_identity_basis_returns_symbols():
    sub = SubspaceModel(np.eye(5), np.eye(5))
    np.testing.assert_allclose(synthesize_waveform(sub, rng(3)), draw_symbols(sub, rng(3)))


def test_qpsk_waveform_energy(std):
    x = synthesize_waveform(std.sub, rng(), 10_000)
    assert abs(np.mean(np.sum(np.abs(x) ** 2, axis=1)) / 32 - 1) < 0.02


def test_shared_waveform_and_structure(std):
    m = synthesize_trial(std.cfg, std.sub, std.noise, Hypothesis.H1, rng())
    assert m.ref.shape == (8, 128) and m.surv.shape == (8, 128)
    assert m.alpha.shape == (8,) and m.beta.shape == (8,)
    assert m.waveform.shape == (128,)


def test_h1_structure_exact():
    sub = SubspaceModel(np.eye(4, 2), np.eye(2))
    # nearly noiseless channels expose the exact signal structure
    tiny = 1e-20 * np.eye(4)
    noise = NoiseModel.from_covariances(tiny, tiny)
    from collabradar.model import SystemConfig
    cfg = SystemConfig(n_samples=4, subspace_dim=2, n_receivers=3, n_transmitters=1, mac_gain=(1.0,))
    m = synthesize_trial(cfg, sub, noise, Hypothesis.H1, rng())
    np.testing.assert_allclose(m.ref, m.beta[:, None] * m.waveform[None, :], atol=1e-8)
    np.testing.assert_allclose(m.surv, m.alpha[:, None] * m.waveform[None, :], atol=1e-8)
    m0 = synthesize_trial(cfg, sub, noise, Hypothesis.H0, rng())
    assert np.max(np.abs(m0.surv)) < 1e-8


def test_h0_surveillance_independent_of_waveform(std):
    b = synthesize_batch(std.cfg, std.sub, std.noise, Hypothesis.H0, rng(), 10_000)
    s = b.surv[:, 0, 0]
    x = b.waveform[:, 0]
    corr = np.abs(np.mean(s * x.conj())) / np.sqrt(np.mean(np.abs(s) ** 2) * np.mean(np.abs(x) ** 2))
    assert corr < 0.05


def test_zero_rcs_h1_matches_h0(std):
    cfg = std.cfg.replace(sigma_alpha_sq=0.0, n_receivers=1, n_transmitters=1, mac_gain=(1.0,))
    s1 = synthesize_batch(cfg, std.sub, std.noise, Hypothesis.H1, rng(1), 20_000).surv[:, 0, :4].ravel()
    s0 = synthesize_batch(cfg, std.sub, std.noise, Hypothesis.H0, rng(2), 20_000).surv[:, 0, :4].ravel()
    # two-sample tests on mean and second moment
    for f in (lambda v: v.real, lambda v: v.imag, lambda v: np.abs(v) ** 2):
        a, b = f(s1), f(s0)
        se = np.sqrt(a.var() / a.size + b.var() / b.size)
        assert abs(a.mean() - b.mean()) < 4 * se


def test_reference_energy(std):
    cfg = std.cfg
    b = synthesize_batch(cfg, std.sub, std.noise, Hypothesis.H0, rng(), 10_000)
    e = np.sum(np.abs(b.ref[:, 0]) ** 2, axis=1) / cfg.n_samples
    expect = (cfg.beta_power * cfg.subspace_dim + np.trace(std.noise.cov_ref).real) / cfg.n_samples
    assert abs(e.mean() - expect) < 4 * e.std() / np.sqrt(e.size)


def test_beta_and_alpha_laws(std):
    b = synthesize_batch(std.cfg, std.sub, std.noise, Hypothesis.H1, rng(), 20_000)
    assert abs(b.beta.mean() - 1.0) < 0.01
    assert abs(b.beta.var() - 1.0) < 0.02
    assert abs(b.alpha.mean()) < 0.01 and abs(b.alpha.var() - 1.0) < 0.02


def test_noise_independence(std):
    cfg = std.cfg.replace(sigma_alpha_sq=0.0, mu_beta=0.0, sigma_beta_sq=0.0, n_receivers=3,
                            n_transmitters=1, mac_gain=(1.0,))
    b = synthesize_batch(cfg, std.sub, std.noise, Hypothesis.H0, rng(), 100_000)
    pairs = [(b.ref[:, 0, 0], b.surv[:, 0, 0]), (b.ref[:, 0, 0], b.ref[:, 1, 0]), (b.surv[:, 0, 3], b.surv[:, 2, 3])]
    for u, v in pairs:
        p = u * v.conj()
        for part in (p.real, p.imag):
            assert abs(part.mean()) < 3 * part.std() / np.sqrt(part.size)


def test_same_stream_same_batch(std):
    a = synthesize_batch(std.cfg, std.sub, std.noise, 1, rng(5), 10)
    b = synthesize_batch(std.cfg, std.sub, std.noise, 1, rng(5), 10)
    np.testing.assert_array_equal(a.surv, b.surv)
