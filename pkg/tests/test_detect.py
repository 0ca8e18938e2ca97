import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collabradar.collab import af_baseline, design_from_matrix, design_weights
from collabradar.detect import (
    DetectionWarning,
    auc_from_scores,
    bootstrap_auc_ci,
    calibrate_threshold,
    collaborate,
    empirical_roc,
    estimate_roc,
    fuse,
    roc_from_energies,
)
from collabradar.model import Topology, derive_stream
from collabradar.moments import CcMoments, cc_moments_closed_form
from collabradar.montecarlo import cc_samples, pipeline_samples

MO = CcMoments(64.0, 608.0)


def rng(k=0):
    return derive_stream(11, k, 0)


def identity_design(l, eps=0.0, eta=0.0):
    return design_from_matrix(np.eye(l), Topology(np.eye(l, dtype=int)), np.ones(l), MO, eps, eta)


def test_identity_combining():
    c = rng().standard_normal((5, 4)) + 0j
    np.testing.assert_array_equal(collaborate(identity_design(4), c, rng()), c)


def test_collaboration_noise_variance():
    y = collaborate(identity_design(3, eps=1.0), np.zeros((100_000, 3)), rng())
    assert np.all(np.abs(y.var(axis=0) - 1) < 0.03)


def test_mask_semantics(std):
    d = design_weights(std.topo, std.cfg.gains, MO, 1, 1, 1)
    c = rng().standard_normal(8) + 0j
    base = collaborate(d, c, rng())
    for i in range(std.topo.m):
        for j in np.flatnonzero(np.asarray(std.topo.adjacency)[i] == 0):
            c2 = c.copy()
            c2[j] += 100.0
            y = collaborate(d, c2, rng())
            assert y[i] == base[i]


def test_fuse_zero():
    s = fuse(np.zeros(3), np.ones(3), 0.0, rng())
    assert s.z == 0 and s.energy == 0


def test_fuse_noise_variance():
    s = fuse(np.ones(2), np.zeros((100_000, 2)), 2.0, rng())
    assert abs(s.z.var() / 2.0 - 1) < 0.03
    np.testing.assert_array_equal(s.energy, np.abs(s.z) ** 2)


def test_threshold_example():
    assert calibrate_threshold(np.arange(1, 101), 0.05) == 96


def test_threshold_boundary():
    e = np.arange(1, 101)
    assert calibrate_threshold(e, 0.999) == 2  # 99 of 100 exceed 2 -> 0.99 <= 0.999
    assert calibrate_threshold(e, 1 - 1e-9) == 2
    e = np.random.default_rng(0).permutation(e)
    assert calibrate_threshold(e, 0.05) == 96


def test_threshold_constant_warns_and_empty_raises():
    with pytest.warns(DetectionWarning, match="constant"):
        calibrate_threshold(np.ones(100), 0.1)
    with pytest.raises(ValueError):
        calibrate_threshold([], 0.1)
    with pytest.warns(DetectionWarning, match="samples"):
        calibrate_threshold(np.arange(5.0), 0.01)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=20, max_size=200), st.floats(0.01, 0.99))
def test_threshold_pfa_bound(e, pfa):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tau = calibrate_threshold(e, pfa)
    e = np.asarray(e)
    assert np.mean(e >= tau) <= pfa + 1e-12
    # no smaller sample also satisfies the bound
    smaller = e[e < tau]
    if smaller.size:
        assert np.mean(e >= smaller.max()) > pfa


def test_roc_shape_and_auc():
    r = np.random.default_rng(1)
    e0, e1 = r.exponential(1, 500), r.exponential(3, 400)
    pfa, pd = empirical_roc(e0, e1)
    assert pfa[0] == 0 and pd[0] == 0 and pfa[-1] == 1 and pd[-1] == 1
    assert np.all(np.diff(pfa) >= 0) and np.all(np.diff(pd) >= 0)
    # Mann-Whitney oracle
    mw = np.mean(e1[:, None] > e0[None, :]) + 0.5 * np.mean(e1[:, None] == e0[None, :])
    assert auc_from_scores(e0, e1) == pytest.approx(mw, abs=1e-12)
    assert roc_from_energies(e0, e1, n_boot=0).auc == pytest.approx(mw, abs=1e-12)


def test_auc_with_ties():
    e0 = np.array([1, 2, 2, 3.0])
    e1 = np.array([2, 3, 3, 4.0])
    mw = np.mean(e1[:, None] > e0[None, :]) + 0.5 * np.mean(e1[:, None] == e0[None, :])
    assert roc_from_energies(e0, e1, n_boot=0).auc == pytest.approx(mw)


def test_bootstrap_ci_brackets_auc():
    r = np.random.default_rng(2)
    e0, e1 = r.exponential(1, 2000), r.exponential(2, 2000)
    lo, hi = bootstrap_auc_ci(e0, e1, n_boot=300, rng=np.random.default_rng(0))
    auc = auc_from_scores(e0, e1)
    assert lo < auc < hi and hi - lo < 0.06
    # brute-force bootstrap oracle with the same resampling draws
    g = np.random.default_rng(0)
    ref = []
    for _ in range(300):
        i0 = np.bincount(g.integers(0, 2000, 2000), minlength=2000)
        i1 = np.bincount(g.integers(0, 2000, 2000), minlength=2000)
        ref.append(auc_from_scores(np.repeat(e0, i0), np.repeat(e1, i1)))
    assert (lo, hi) == pytest.approx(tuple(np.quantile(ref, [0.025, 0.975])), abs=1e-12)


def test_roc_csv(tmp_path):
    roc = roc_from_energies([1.0, 2.0], [1.5, 3.0], n_boot=0)
    p = tmp_path / "r.csv"
    roc.to_csv(p, "seed=1")
    lines = p.read_text().splitlines()
    assert lines[0] == "# seed=1" and lines[1] == "pfa,pd"
    assert lines[2] == "0.0,0.0" and lines[-1] == "1.0,1.0"


def test_zero_rcs_auc_half(std):
    cfg = std.cfg.replace(sigma_alpha_sq=0.0)
    d = af_baseline(cfg, MO)
    roc = estimate_roc(cfg, std.sub, std.noise, std.kernel, d, 10_000, seed=3, n_boot=0)
    assert abs(roc.auc - 0.5) < 0.02


def test_estimate_roc_warns_small(std):
    d = af_baseline(std.cfg, MO)
    with pytest.warns(DetectionWarning):
        estimate_roc(std.cfg, std.sub, std.noise, std.kernel, d, 200, seed=1, n_boot=0)


def test_mc_energy_gap(std):
    cfg = std.cfg
    sub = std.sub.with_alphabet("gaussian")
    mo = cc_moments_closed_form(cfg, std.kernel, sub)
    d = design_weights(std.topo, cfg.gains, mo, 1.0, 1.0, 1.0)
    e = {h: np.abs(pipeline_samples(cfg, sub, std.noise, {"d": d}, h, 30_000, 4, std.kernel)["d"]) ** 2
         for h in (0, 1)}
    gap = e[1].mean() - e[0].mean()
    se = np.sqrt(e[1].var() / e[1].size + e[0].var() / e[0].size)
    wg = np.sum(np.abs(d.w_matrix.conj().T @ d.gains) ** 2)
    assert abs(gap - (mo.var_h1 - mo.var_h0) * wg) < 5 * se


def test_block_order_invariance(std):
    a = cc_samples(std.cfg, std.sub, std.noise, 1, 5000, seed=2, kernel=std.kernel)
    b = cc_samples(std.cfg, std.sub, std.noise, 1, 5000, seed=2, kernel=std.kernel, block_order=[2, 0, 1])
    np.testing.assert_array_equal(a, b)
