"""Closed-form error expectations against Monte-Carlo and algebraic oracles."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irsfd.kron_expectation import (
    build_aux,
    build_sigma,
    expect_eff_hhx,
    expect_eff_hxh,
    expect_hhx,
    expect_hxh,
    error_part_eff_hxh,
    link_triple,
)
from irsfd.linalg import herm, max_abs_offherm, rand_cn, trace_prod_t
from irsfd.system_model import compose_effective_channels
from irsfd.validation import (
    make_cfg,
    mc_effective_second_moments,
    mc_second_moments,
    random_covariances,
    random_estimates,
    random_phase,
    random_psd,
    random_state,
)


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_expect_hxh_zero_estimate_reduces_to_trace_term(rng):
    j_cov = random_psd(rng, 3)
    k_cov = random_psd(rng, 2)
    x = random_psd(rng, 3)
    out = expect_hxh(np.zeros((2, 3)), j_cov, k_cov, x)
    np.testing.assert_allclose(out, trace_prod_t(x, j_cov) * k_cov, atol=1e-14)


def test_expect_hxh_zero_covariance_reduces_to_quadratic_form(rng):
    h = rand_cn(rng, 2, 3)
    x = random_psd(rng, 3)
    out = expect_hxh(h, np.zeros((3, 3)), np.zeros((2, 2)), x)
    np.testing.assert_allclose(out, h @ x @ herm(h), atol=1e-14)


def test_expect_hxh_iid_identity_case(rng):
    h = rand_cn(rng, 4, 3)
    sigma_sq = 0.3
    out = expect_hxh(h, np.eye(3), sigma_sq * np.eye(4), np.eye(3))
    np.testing.assert_allclose(out, h @ herm(h) + 3 * sigma_sq * np.eye(4), atol=1e-14)


def test_expect_hhx_zero_estimate_mirrored(rng):
    j_cov = random_psd(rng, 3)
    k_cov = random_psd(rng, 2)
    m = random_psd(rng, 2)
    out = expect_hhx(np.zeros((2, 3)), j_cov, k_cov, m)
    np.testing.assert_allclose(out, np.trace(k_cov @ m).real * j_cov.T, atol=1e-13)


@given(st.integers(0, 2**32 - 1))
def test_expect_ops_linear_and_hermitian(seed):
    rng = np.random.default_rng(seed)
    h = rand_cn(rng, 3, 2)
    j_cov = random_psd(rng, 2)
    k_cov = random_psd(rng, 3)
    x1 = random_psd(rng, 2)
    x2 = random_psd(rng, 2)
    c = float(rng.uniform(0.1, 2.0))
    lhs = expect_hxh(h, j_cov, k_cov, x1 + c * x2)
    rhs = expect_hxh(h, j_cov, k_cov, x1) + c * expect_hxh(h, j_cov, k_cov, x2)
    scale = np.linalg.norm(lhs)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(scale, 1.0)
    assert max_abs_offherm(lhs) <= 1e-12 * max(scale, 1.0)
    assert np.min(np.linalg.eigvalsh(lhs)) >= -1e-12 * max(scale, 1.0)


def test_expect_hxh_against_monte_carlo(rng):
    h = rand_cn(rng, 3, 2)
    j_cov = random_psd(rng, 2)
    k_cov = random_psd(rng, 3)
    x = random_psd(rng, 2, scale=1.7)
    m = random_psd(rng, 3)
    fwd, rev = mc_second_moments(h, j_cov, k_cov, x, m, 100_000, rng)
    assert _rel(fwd, expect_hxh(h, j_cov, k_cov, x)) < 0.02
    assert _rel(rev, expect_hhx(h, j_cov, k_cov, m)) < 0.02


def _random_links(rng, nd, md, rc):
    """(direct, outer, inner) triple for a compound nd x md channel via rc."""
    d = (rand_cn(rng, nd, md), random_psd(rng, md), random_psd(rng, nd))
    a = (rand_cn(rng, nd, rc), random_psd(rng, rc), random_psd(rng, nd))
    b = (rand_cn(rng, rc, md), random_psd(rng, md), random_psd(rng, rc))
    return d, a, b


def test_effective_expectation_zero_error_is_exact_composition(rng):
    d, a, b = _random_links(rng, 2, 3, 4)
    d0 = (d[0], np.zeros((3, 3)), np.zeros((2, 2)))
    a0 = (a[0], np.zeros((4, 4)), np.zeros((2, 2)))
    b0 = (b[0], np.zeros((3, 3)), np.zeros((4, 4)))
    tv = np.exp(2j * np.pi * rng.random(4))
    x = random_psd(rng, 3)
    eff = d[0] + (a[0] * tv) @ b[0]
    np.testing.assert_allclose(
        expect_eff_hxh(d0, a0, b0, tv, x), eff @ x @ herm(eff), atol=1e-12
    )
    m = random_psd(rng, 2)
    np.testing.assert_allclose(
        expect_eff_hhx(d0, a0, b0, tv, m), herm(eff) @ m @ eff, atol=1e-12
    )


def test_effective_expectation_against_monte_carlo(rng):
    d, a, b = _random_links(rng, 2, 3, 4)
    tv = np.exp(2j * np.pi * rng.random(4))
    x = random_psd(rng, 3)
    m = random_psd(rng, 2)
    fwd, rev = mc_effective_second_moments(d, a, b, tv, x, m, 100_000, rng)
    assert _rel(fwd, expect_eff_hxh(d, a, b, tv, x)) < 0.02
    assert _rel(rev, expect_eff_hhx(d, a, b, tv, m)) < 0.02


def test_error_part_is_expectation_minus_estimated_part(rng):
    d, a, b = _random_links(rng, 3, 2, 5)
    tv = np.exp(2j * np.pi * rng.random(5))
    x = random_psd(rng, 2)
    eff = d[0] + (a[0] * tv) @ b[0]
    expected = expect_eff_hxh(d, a, b, tv, x) - eff @ x @ herm(eff)
    got = error_part_eff_hxh(d, a, b, tv, x)
    assert _rel(got, expected) < 1e-12


def test_error_part_invariant_to_common_phase_rotation(rng):
    d, a, b = _random_links(rng, 3, 2, 5)
    tv = np.exp(2j * np.pi * rng.random(5))
    x = random_psd(rng, 2)
    base = error_part_eff_hxh(d, a, b, tv, x)
    rotated = error_part_eff_hxh(d, a, b, np.exp(0.9j) * tv, x)
    assert _rel(rotated, base) < 1e-12


def test_build_aux_matches_direct_composition(rng):
    cfg = make_cfg()
    est = random_estimates(cfg, rng)
    err = random_covariances(cfg, rng)
    state = random_state(cfg, rng)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    aux = build_aux(est, err, state.theta, u_cov, v_cov)
    link = lambda name: link_triple(est, err, name)
    np.testing.assert_allclose(
        aux.q_k,
        expect_eff_hxh(link("h_k"), link("h_0theta"), link("h_thetak"), state.theta, u_cov),
        atol=1e-14,
    )
    np.testing.assert_allclose(
        aux.t_0,
        expect_eff_hxh(link("h_0"), link("h_0theta"), link("h_theta0"), state.theta, v_cov),
        atol=1e-14,
    )


def test_build_sigma_consistent_with_aux_combination(rng):
    cfg = make_cfg()
    est = random_estimates(cfg, rng)
    err = random_covariances(cfg, rng)
    state = random_state(cfg, rng)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    aux = build_aux(est, err, state.theta, u_cov, v_cov)
    eff = compose_effective_channels(est, state.theta)
    sig = build_sigma(est, err, state.theta, u_cov, v_cov, cfg)
    ul_ref = (
        aux.q_k - eff.h_bar_k @ u_cov @ herm(eff.h_bar_k)
        + aux.t_0 + cfg.sigma0_sq * np.eye(cfg.n0)
    )
    dl_ref = (
        aux.t_j - eff.h_bar_j @ v_cov @ herm(eff.h_bar_j)
        + aux.q_jk + cfg.sigmaj_sq * np.eye(cfg.nj)
    )
    assert _rel(sig.sigma_ul, ul_ref) < 1e-10
    assert _rel(sig.sigma_dl, dl_ref) < 1e-10
    assert np.min(np.linalg.eigvalsh(sig.sigma_ul)) > 0
    assert np.min(np.linalg.eigvalsh(sig.sigma_dl)) > 0


def test_build_sigma_noise_only_when_silent(rng):
    cfg = make_cfg()
    est = random_estimates(cfg, rng)
    err = random_covariances(cfg, rng)
    theta = random_phase(cfg, rng)
    z_u = np.zeros((cfg.mk, cfg.mk), dtype=complex)
    z_v = np.zeros((cfg.m0, cfg.m0), dtype=complex)
    sig = build_sigma(est, err, theta, z_u, z_v, cfg)
    np.testing.assert_allclose(sig.sigma_ul, cfg.sigma0_sq * np.eye(cfg.n0), atol=1e-14)
    np.testing.assert_allclose(sig.sigma_dl, cfg.sigmaj_sq * np.eye(cfg.nj), atol=1e-14)
