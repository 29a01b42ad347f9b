"""Alternating-solver blocks: combiners, weights, power solve, outer loop."""

from dataclasses import replace

import numpy as np
import pytest

from irsfd.ewmmse import (
    SolverOptions,
    expected_mse,
    init_state,
    run_alternating_solver,
    solve_power_constrained,
    update_combiners,
    update_precoders,
    update_weights,
)
from irsfd.linalg import herm, max_abs_offherm, rand_cn
from irsfd.rate import ergodic_wsr_lb
from irsfd.system_model import IrsPhase
from irsfd.validation import make_cfg, random_instance, random_psd

LN2 = np.log(2.0)


def _surrogate_instance(rng):
    cfg, est, err, state = random_instance(rng)
    return cfg, est, err, state


# ---------------------------------------------------------------------------
# Power-constrained quadratic solve.
# ---------------------------------------------------------------------------


def test_power_solve_zero_quadratic_scales_rhs_to_budget(rng):
    rhs = rand_cn(rng, 4, 2)
    budget = 2.5
    p, lam = solve_power_constrained(np.zeros((4, 4), dtype=complex), rhs, budget)
    scale = np.sqrt(budget) / np.linalg.norm(rhs)
    np.testing.assert_allclose(p, scale * rhs, atol=1e-9)
    assert lam == pytest.approx(np.linalg.norm(rhs) / np.sqrt(budget), rel=1e-9)


def test_power_solve_inactive_constraint_gives_zero_multiplier(rng):
    x = random_psd(rng, 4, scale=1.0) + np.eye(4)
    rhs = 1e-3 * rand_cn(rng, 4, 2)
    p, lam = solve_power_constrained(x, rhs, budget=1e6)
    assert lam == 0.0
    np.testing.assert_allclose(x @ p, rhs, atol=1e-10)


def test_power_solve_rejects_nonpositive_budget(rng):
    with pytest.raises(ValueError):
        solve_power_constrained(np.eye(2, dtype=complex), rand_cn(rng, 2, 1), 0.0)


def test_power_solve_stationarity_and_feasibility(rng):
    for _ in range(20):
        n = int(rng.integers(2, 6))
        x = random_psd(rng, n, scale=1.0)
        rhs = rand_cn(rng, n, int(rng.integers(1, n + 1)))
        budget = float(rng.uniform(0.1, 10.0))
        p, lam = solve_power_constrained(x, rhs, budget)
        power = float(np.sum(np.abs(p) ** 2))
        assert power <= budget * (1.0 + 1e-9)
        assert lam >= 0.0
        assert lam * abs(power - budget) <= 1e-6 * budget
        if lam > 0.0:
            np.testing.assert_allclose((x + lam * np.eye(n)) @ p, rhs, atol=1e-8)


def test_power_solve_beats_random_feasible_points(rng):
    def objective(p, x, rhs):
        quad = np.trace(herm(p) @ x @ p).real
        lin = 2.0 * np.trace(herm(p) @ rhs).real
        return quad - lin

    for _ in range(10):
        x = random_psd(rng, 4, scale=1.0)
        rhs = rand_cn(rng, 4, 2)
        budget = float(rng.uniform(0.5, 3.0))
        p, _ = solve_power_constrained(x, rhs, budget)
        best = objective(p, x, rhs)
        for _ in range(20):
            q = rand_cn(rng, 4, 2)
            q *= np.sqrt(budget * rng.uniform(0.0, 1.0)) / np.linalg.norm(q)
            assert best <= objective(q, x, rhs) + 1e-9


# ---------------------------------------------------------------------------
# Combiner and weight blocks.
# ---------------------------------------------------------------------------


def test_combiner_minimizes_expected_mse_trace(rng):
    cfg, est, err, state = _surrogate_instance(rng)
    f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
    at_opt = expected_mse(est, err, state.theta, replace(state, f_k=f_k, f_j=f_j), cfg)
    for _ in range(10):
        perturbed = replace(
            state,
            f_k=f_k + 0.1 * rand_cn(rng, *f_k.shape),
            f_j=f_j + 0.1 * rand_cn(rng, *f_j.shape),
        )
        at_pert = expected_mse(est, err, state.theta, perturbed, cfg)
        assert np.trace(at_opt.e_k).real <= np.trace(at_pert.e_k).real + 1e-10
        assert np.trace(at_opt.e_j).real <= np.trace(at_pert.e_j).real + 1e-10


def test_expected_mse_is_identity_at_zero_combiner(rng):
    cfg, est, err, state = _surrogate_instance(rng)
    silent = replace(
        state, f_k=np.zeros_like(state.f_k), f_j=np.zeros_like(state.f_j)
    )
    mse = expected_mse(est, err, state.theta, silent, cfg)
    np.testing.assert_allclose(mse.e_k, np.eye(cfg.uk), atol=1e-14)
    np.testing.assert_allclose(mse.e_j, np.eye(cfg.vj), atol=1e-14)


def test_weights_invert_mse_with_rate_scaling(rng):
    cfg, est, err, state = _surrogate_instance(rng)
    f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
    stage = replace(state, f_k=f_k, f_j=f_j)
    mse = expected_mse(est, err, state.theta, stage, cfg)
    w_k, w_j = update_weights(mse, cfg)
    np.testing.assert_allclose(w_k @ mse.e_k, (cfg.wk / LN2) * np.eye(cfg.uk), atol=1e-9)
    np.testing.assert_allclose(w_j @ mse.e_j, (cfg.wj / LN2) * np.eye(cfg.vj), atol=1e-9)
    assert max_abs_offherm(w_k) < 1e-12
    assert np.all(np.linalg.eigvalsh(w_k) > 0.0)


def test_precoder_update_respects_budgets(rng):
    cfg, est, err, state = _surrogate_instance(rng)
    f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
    stage = replace(state, f_k=f_k, f_j=f_j)
    w_k, w_j = update_weights(expected_mse(est, err, state.theta, stage, cfg), cfg)
    stage = replace(stage, w_k=w_k, w_j=w_j)
    u_k, v_j, lambda_k, lambda_0 = update_precoders(est, err, state.theta, stage, cfg)
    assert np.sum(np.abs(u_k) ** 2) <= cfg.alphak * (1.0 + 1e-9)
    assert np.sum(np.abs(v_j) ** 2) <= cfg.alpha0 * (1.0 + 1e-9)
    assert lambda_k >= 0.0 and lambda_0 >= 0.0


# ---------------------------------------------------------------------------
# Initialization.
# ---------------------------------------------------------------------------


def test_init_state_policies(rng):
    cfg, est, _, _ = _surrogate_instance(rng)
    for policy in ("svd_estimate", "scaled_identity"):
        state = init_state(est, cfg, SolverOptions(init_policy=policy))
        assert np.sum(np.abs(state.u_k) ** 2) == pytest.approx(cfg.alphak, rel=1e-12)
        assert np.sum(np.abs(state.v_j) ** 2) == pytest.approx(cfg.alpha0, rel=1e-12)
        np.testing.assert_array_equal(state.theta.theta, np.ones(cfg.rc))
    state = init_state(est, cfg, SolverOptions(init_policy="random"), rng=rng)
    assert np.sum(np.abs(state.u_k) ** 2) == pytest.approx(cfg.alphak, rel=1e-12)
    with pytest.raises(ValueError):
        init_state(est, cfg, SolverOptions(init_policy="random"))
    with pytest.raises(ValueError):
        init_state(est, cfg, SolverOptions(init_policy="nope"))


def test_init_state_honors_given_phase(rng):
    cfg, est, _, _ = _surrogate_instance(rng)
    phases = rng.uniform(-np.pi, np.pi, cfg.rc)
    given = IrsPhase.from_angles(phases)
    state = init_state(est, cfg, theta_init=given)
    np.testing.assert_array_equal(state.theta.theta, given.theta)


# ---------------------------------------------------------------------------
# Outer loop.
# ---------------------------------------------------------------------------


def test_single_sweep_trace_has_two_records(rng):
    cfg, est, err, _ = _surrogate_instance(rng)
    opts = SolverOptions(max_outer_iters=1, outer_tol=0.0)
    _, trace = run_alternating_solver(est, err, cfg, opts)
    assert len(trace) == 2
    assert trace[0].iteration == 0 and trace[1].iteration == 1


def test_bound_nondecreasing_across_sweeps(rng):
    for _ in range(5):
        cfg, est, err, _ = _surrogate_instance(rng)
        opts = SolverOptions(max_outer_iters=30, outer_tol=0.0)
        _, trace = run_alternating_solver(est, err, cfg, opts)
        values = np.array([rec.wsr_lb for rec in trace])
        drops = np.diff(values)
        assert np.all(drops >= -1e-9 * np.maximum(np.abs(values[1:]), 1.0))


def test_solver_final_state_matches_trace_tail(rng):
    cfg, est, err, _ = _surrogate_instance(rng)
    state, trace = run_alternating_solver(est, err, cfg, SolverOptions(max_outer_iters=10))
    lb = ergodic_wsr_lb(est, err, state, cfg)
    assert lb.wsr_total == pytest.approx(trace[-1].wsr_lb, rel=1e-12)
    assert trace[-1].power_ul == pytest.approx(np.sum(np.abs(state.u_k) ** 2), rel=1e-12)


def test_frozen_phase_never_moves(rng):
    cfg, est, err, _ = _surrogate_instance(rng)
    phases = rng.uniform(-np.pi, np.pi, cfg.rc)
    given = IrsPhase.from_angles(phases)
    opts = SolverOptions(max_outer_iters=5, optimize_irs=False)
    state, _ = run_alternating_solver(est, err, cfg, opts, theta_init=given)
    np.testing.assert_array_equal(state.theta.theta, given.theta)


def test_tight_tolerance_stops_before_iteration_cap(rng):
    cfg, est, err, _ = _surrogate_instance(rng)
    opts = SolverOptions(max_outer_iters=200, outer_tol=1e-3)
    _, trace = run_alternating_solver(est, err, cfg, opts)
    assert len(trace) < 201
    tail = abs(trace[-1].wsr_lb - trace[-2].wsr_lb)
    assert tail <= 1e-3 * max(abs(trace[-1].wsr_lb), 1e-300)
