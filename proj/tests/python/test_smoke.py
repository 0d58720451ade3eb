"""Smoke tests for the Python bindings."""

import math

import numpy as np
import pytest

import lvgm


def test_rho_values():
    ising = lvgm.FamilySpec(lvgm.Family.ising)
    assert lvgm.rho(ising, 0.0) == pytest.approx(0.0)
    poisson = lvgm.FamilySpec(lvgm.Family.poisson)
    assert lvgm.rho(poisson, 0.0) == pytest.approx(1.0)
    expo = lvgm.FamilySpec(lvgm.Family.exponential)
    assert lvgm.rho(expo, -1.0) == pytest.approx(0.0)
    with pytest.raises(Exception):
        lvgm.rho(expo, 0.5)


def test_svt_shrinks_singular_values():
    M = np.diag([3.0, 1.0])
    Z = lvgm.svt(M, 2.0)
    assert Z[0, 0] == pytest.approx(1.0)
    assert abs(Z[1, 1]) < 1e-12


def test_generate_fit_recover_cycle():
    spec = lvgm.TruthSpec()
    spec.family = lvgm.FamilySpec(lvgm.Family.gaussian)
    spec.d = 10
    spec.r = 1
    spec.singular_values = [0.72]
    theta = lvgm.make_theta(spec, 3)
    B = lvgm.make_loading(spec, 3)
    data = lvgm.sample(spec, theta, B, 2000, -1, -1, 3)
    assert data.X.shape == (10, 2000)

    cfg = lvgm.PenaltyConfig(0.08, 0.004)
    fit = lvgm.fit_gaussian_reduced(data, cfg)
    assert fit.converged
    truth_edges = lvgm.support_of(theta, 1e-8)
    assert fit.support == truth_edges
    assert fit.rank == 1


def test_full_and_reduced_paths_agree():
    spec = lvgm.TruthSpec()
    spec.family = lvgm.FamilySpec(lvgm.Family.gaussian)
    spec.d = 6
    spec.r = 1
    spec.singular_values = [0.72]
    theta = lvgm.make_theta(spec, 5)
    B = lvgm.make_loading(spec, 5)
    data = lvgm.sample(spec, theta, B, 300, -1, -1, 5)

    opts = lvgm.SolveOptions()
    opts.tol_rel_obj = 1e-11
    opts.resid_tol = 1e-6
    opts.max_iter = 30000
    cfg = lvgm.PenaltyConfig(0.1, 0.05)
    full = lvgm.fit(data, spec.family, cfg, opts)
    red = lvgm.fit_gaussian_reduced(data, cfg, opts)
    assert np.abs(full.params.theta - red.params.theta).max() < 1e-4


def test_ising_pipeline_and_metrics():
    spec = lvgm.TruthSpec()
    spec.family = lvgm.FamilySpec(lvgm.Family.ising)
    spec.d = 8
    spec.r = 1
    spec.singular_values = [0.72]
    spec.latent_law = lvgm.LatentLaw.standard_normal
    theta = lvgm.make_theta(spec, 7)
    B = lvgm.make_loading(spec, 7)
    data = lvgm.sample(spec, theta, B, 1500, -1, -1, 7)
    assert set(np.unique(data.X)) <= {-1.0, 1.0}

    fit = lvgm.fit(data, spec.family, lvgm.PenaltyConfig(0.05, 0.002))
    fdr, pwr = lvgm.fdr_pwr(fit.support, lvgm.support_of(theta, 1e-8))
    assert 0.0 <= fdr <= 1.0
    assert 0.0 <= pwr <= 1.0

    nll = lvgm.holdout_nll(fit, data, spec.family)
    assert math.isfinite(nll)


def test_gradient_shapes():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(4, 9))
    theta = np.eye(4)
    L = np.zeros((4, 9))
    ev = lvgm.gaussian_smooth(theta, L, X)
    assert ev.grad_theta.shape == (4, 4)
    assert ev.grad_L.shape == (4, 9)
    np.testing.assert_allclose(ev.grad_L, -X / 9.0, atol=1e-12)
