"""Rate evaluation: instantaneous, analytic lower bound, Monte Carlo."""

from dataclasses import replace

import numpy as np
import pytest

from irsfd.linalg import herm, hermitize
from irsfd.rate import (
    ergodic_wsr_lb,
    instantaneous_wsr,
    monte_carlo_wsr,
    monte_carlo_wsr_fixed_rx,
)
from irsfd.system_model import (
    BeamformingState,
    ErrorCovariances,
    IrsPhase,
    TrueChannels,
    compose_effective_channels,
)
from irsfd.validation import make_cfg, random_instance


def _siso_setup(h, power, noise):
    cfg = make_cfg(
        m0=1, n0=1, mk=1, nj=1, uk=1, vj=1, irs_rows=1, irs_cols=1,
        alpha0=power, alphak=power, sigma0_sq=noise, sigmaj_sq=noise,
    )
    z = np.zeros((1, 1), dtype=complex)
    true_ch = TrueChannels(
        h_k=np.array([[h]], dtype=complex), h_j=z, h_0=z, h_jk=z,
        h_theta0=z, h_0theta=z, h_jtheta=z, h_thetak=z,
    )
    state = BeamformingState(
        u_k=np.array([[np.sqrt(power)]], dtype=complex),
        v_j=z.copy(),
        f_k=np.ones((1, 1), dtype=complex),
        f_j=np.ones((1, 1), dtype=complex),
        w_k=np.eye(1, dtype=complex),
        w_j=np.eye(1, dtype=complex),
        theta=IrsPhase.ones(1),
    )
    return cfg, true_ch, state


def test_siso_rate_is_two_bits_at_snr_three():
    cfg, true_ch, state = _siso_setup(h=1.0, power=3.0, noise=1.0)
    report = instantaneous_wsr(true_ch, state, cfg)
    assert report.r_ul == pytest.approx(2.0, abs=1e-12)
    assert report.r_dl == 0.0
    assert report.wsr_total == pytest.approx(2.0, abs=1e-12)


def test_zero_power_gives_zero_rate(rng):
    cfg, est, err, state = random_instance(rng)
    silent = replace(
        state,
        u_k=np.zeros_like(state.u_k),
        v_j=np.zeros_like(state.v_j),
    )
    lb = ergodic_wsr_lb(est, err, silent, cfg)
    assert lb.wsr_total == pytest.approx(0.0, abs=1e-12)
    report = monte_carlo_wsr(est, err, silent, cfg, 3, rng)
    assert report.wsr_total == pytest.approx(0.0, abs=1e-12)


def test_instantaneous_matches_eigenvalue_oracle(rng):
    cfg, est, err, state = random_instance(rng)
    true_ch = TrueChannels(**{k: getattr(est, k) for k in est.__dataclass_fields__})
    report = instantaneous_wsr(true_ch, state, cfg)
    eff = compose_effective_channels(true_ch, state.theta)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    cov_ul = eff.h_bar_0 @ v_cov @ herm(eff.h_bar_0) + cfg.sigma0_sq * np.eye(cfg.n0)
    cov_dl = eff.h_bar_jk @ u_cov @ herm(eff.h_bar_jk) + cfg.sigmaj_sq * np.eye(cfg.nj)
    r_ref = 0.0
    for w, h, p, c in (
        (cfg.wk, eff.h_bar_k, state.u_k, cov_ul),
        (cfg.wj, eff.h_bar_j, state.v_j, cov_dl),
    ):
        gram = hermitize(herm(p) @ herm(h) @ np.linalg.inv(c) @ h @ p)
        vals = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
        r_ref += w * float(np.sum(np.log2(1.0 + vals)))
    assert report.wsr_total == pytest.approx(r_ref, abs=1e-9)


def test_lower_bound_tight_at_zero_error(rng):
    cfg, est, err, state = random_instance(rng)
    zeros = ErrorCovariances.zeros(cfg)
    lb = ergodic_wsr_lb(est, zeros, state, cfg)
    true_ch = TrueChannels(**{k: getattr(est, k) for k in est.__dataclass_fields__})
    inst = instantaneous_wsr(true_ch, state, cfg)
    assert lb.wsr_total == pytest.approx(inst.wsr_total, abs=1e-10)
    assert lb.r_ul == pytest.approx(inst.r_ul, abs=1e-10)


def test_lower_bound_below_monte_carlo(rng):
    for _ in range(5):
        cfg, est, err, state = random_instance(rng, cov_scale=0.1)
        lb = ergodic_wsr_lb(est, err, state, cfg)
        mc = monte_carlo_wsr(est, err, state, cfg, 1500, rng)
        assert lb.wsr_total <= mc.wsr_total + 2.0 * mc.stderr


def test_perfect_csi_bound_dominates_noisy_bound(rng):
    cfg, est, err, state = random_instance(rng)
    noisy = ergodic_wsr_lb(est, err, state, cfg)
    clean = ergodic_wsr_lb(est, ErrorCovariances.zeros(cfg), state, cfg)
    assert clean.wsr_total >= noisy.wsr_total - 1e-12


def test_doubling_weights_doubles_wsr(rng):
    cfg, est, err, state = random_instance(rng)
    doubled = replace(cfg, wk=2.0 * cfg.wk, wj=2.0 * cfg.wj)
    base = ergodic_wsr_lb(est, err, state, cfg)
    twice = ergodic_wsr_lb(est, err, state, doubled)
    assert twice.wsr_total == pytest.approx(2.0 * base.wsr_total, rel=1e-12)


def test_monte_carlo_zero_cov_collapses_to_instantaneous(rng):
    cfg, est, err, state = random_instance(rng)
    zeros = ErrorCovariances.zeros(cfg)
    mc = monte_carlo_wsr(est, zeros, state, cfg, 4, rng)
    true_ch = TrueChannels(**{k: getattr(est, k) for k in est.__dataclass_fields__})
    inst = instantaneous_wsr(true_ch, state, cfg)
    assert mc.wsr_total == pytest.approx(inst.wsr_total, abs=1e-12)
    assert mc.stderr == pytest.approx(0.0, abs=1e-12)


def test_monte_carlo_reproducible_and_argument_checked(rng):
    cfg, est, err, state = random_instance(rng)
    a = monte_carlo_wsr(est, err, state, cfg, 50, np.random.default_rng(9))
    b = monte_carlo_wsr(est, err, state, cfg, 50, np.random.default_rng(9))
    assert a == b
    with pytest.raises(ValueError):
        monte_carlo_wsr(est, err, state, cfg, 0, rng)


def test_rate_reports_are_finite_and_nonnegative(rng):
    cfg, est, err, state = random_instance(rng)
    for rep in (
        ergodic_wsr_lb(est, err, state, cfg),
        monte_carlo_wsr(est, err, state, cfg, 10, rng),
    ):
        for value in (rep.wsr_total, rep.r_ul, rep.r_dl):
            assert np.isfinite(value)
            assert value >= 0.0


def _mmse_refreshed(est, err, state, cfg):
    from irsfd.ewmmse import update_combiners

    f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
    return replace(state, f_k=f_k, f_j=f_j)


def test_row_space_rate_invariant_to_output_mixing(rng):
    from irsfd.linalg import rand_cn
    from irsfd.rate import _row_space_rate_bits

    h = rand_cn(rng, 4, 3)
    pre = rand_cn(rng, 3, 2)
    cov = hermitize(rand_cn(rng, 4, 4) @ herm(rand_cn(rng, 4, 4))) + np.eye(4)
    f = rand_cn(rng, 2, 4)
    base = _row_space_rate_bits(f, h, pre, cov)
    for _ in range(5):
        mix = rand_cn(rng, 2, 2) + 2.0 * np.eye(2)
        assert _row_space_rate_bits(mix @ f, h, pre, cov) == pytest.approx(
            base, rel=1e-9
        )
    assert _row_space_rate_bits(np.zeros((2, 4), complex), h, pre, cov) == 0.0


def test_fixed_rx_zero_error_matches_instantaneous(rng):
    cfg, est, err, state = random_instance(rng)
    from irsfd.system_model import CovPair

    zero = ErrorCovariances(
        **{
            n: CovPair(
                np.zeros_like(getattr(err, n).j_cov),
                np.zeros_like(getattr(err, n).k_cov),
            )
            for n in type(err).__dataclass_fields__
        }
    )
    state = _mmse_refreshed(est, zero, state, cfg)
    fixed = monte_carlo_wsr_fixed_rx(est, zero, state, cfg, 4, rng)
    inst = instantaneous_wsr(
        TrueChannels(**{n: getattr(est, n) for n in type(est).__dataclass_fields__}),
        state,
        cfg,
    )
    assert fixed.wsr_total == pytest.approx(inst.wsr_total, rel=1e-9)
    assert fixed.stderr == pytest.approx(0.0, abs=1e-9)


def test_fixed_rx_sandwiched_between_bound_and_genie(rng):
    for _ in range(5):
        cfg, est, err, state = random_instance(rng, cov_scale=0.1)
        state = _mmse_refreshed(est, err, state, cfg)
        lb = ergodic_wsr_lb(est, err, state, cfg)
        fixed = monte_carlo_wsr_fixed_rx(
            est, err, state, cfg, 1200, np.random.default_rng(5)
        )
        genie = monte_carlo_wsr(est, err, state, cfg, 1200, np.random.default_rng(5))
        slack = 2.0 * float(np.hypot(fixed.stderr, genie.stderr))
        assert lb.wsr_total <= fixed.wsr_total + 2.0 * fixed.stderr
        assert fixed.wsr_total <= genie.wsr_total + slack


def test_fixed_rx_zero_combiners_give_zero_rate(rng):
    cfg, est, err, state = random_instance(rng)
    mute = replace(
        state, f_k=np.zeros_like(state.f_k), f_j=np.zeros_like(state.f_j)
    )
    rep = monte_carlo_wsr_fixed_rx(est, err, mute, cfg, 3, rng)
    assert rep.wsr_total == 0.0


def test_fixed_rx_reproducible_and_argument_checked(rng):
    cfg, est, err, state = random_instance(rng)
    a = monte_carlo_wsr_fixed_rx(est, err, state, cfg, 40, np.random.default_rng(3))
    b = monte_carlo_wsr_fixed_rx(est, err, state, cfg, 40, np.random.default_rng(3))
    assert a == b
    with pytest.raises(ValueError):
        monte_carlo_wsr_fixed_rx(est, err, state, cfg, 0, rng)
