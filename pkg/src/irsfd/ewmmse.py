"""Alternating weighted-MMSE design of precoders, combiners and surface phases.

Each outer sweep performs, per user, the exact block minimizations of the
expected weighted MSE (combiner, weight, power-constrained precoder), then
one surface-phase descent pass.  Every step is an exact minimization of the
same surrogate, so the ergodic weighted-sum-rate lower bound is
non-decreasing sweep over sweep.

The precoder subproblem min Tr(W E) s.t. ||P||_F^2 <= budget has the
stationary solution P(lam) = (X + lam I)^{-1} R with the multiplier found by
bisection on the monotone power curve; the curve is evaluated through the
eigendecomposition of X so each probe costs O(dim).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from . import rate as rate_mod
from .irs_mm import MmOptions, build_mm_problem, build_stz, run_mm_phase_opt
from .kron_expectation import build_aux, expect_eff_hhx, link_triple
from .linalg import herm, hermitize, solve_hermitian_pd
from .system_model import (
    BeamformingState,
    ChannelEstimates,
    ErrorCovariances,
    IrsPhase,
    SystemConfig,
    compose_effective_channels,
)


@dataclass(frozen=True)
class SolverOptions:
    outer_tol: float = 1e-4  # relative bound change that stops the outer loop
    max_outer_iters: int = 200
    # Absolute power tolerance in watts; None means 1e-6 * the side's budget.
    bisection_tol: Optional[float] = None
    max_bisection_iters: int = 200
    mm: MmOptions = field(default_factory=MmOptions)
    init_policy: str = "svd_estimate"  # or "scaled_identity", "random"
    optimize_irs: bool = True


@dataclass(frozen=True)
class ExpectedMse:
    """Expected stream-estimation error covariances at the two receivers."""

    e_k: np.ndarray  # uk x uk
    e_j: np.ndarray  # vj x vj


@dataclass(frozen=True)
class SweepTrace:
    """Per-sweep diagnostics of the outer loop."""

    iteration: int
    wsr_lb: float
    power_ul: float
    power_dl: float
    lambda_k: float
    lambda_0: float


LN2 = float(np.log(2.0))


def _rx_cov_ul(aux, cfg: SystemConfig) -> np.ndarray:
    """Expected total receive covariance at the BS: signal + SI + noise."""
    return aux.q_k + aux.t_0 + cfg.sigma0_sq * np.eye(cfg.n0, dtype=complex)


def _rx_cov_dl(aux, cfg: SystemConfig) -> np.ndarray:
    """Expected total receive covariance at the downlink user."""
    return aux.t_j + aux.q_jk + cfg.sigmaj_sq * np.eye(cfg.nj, dtype=complex)


def _mmse_combiner(rx_cov: np.ndarray, h_eff: np.ndarray, precoder: np.ndarray) -> np.ndarray:
    """P^H Heff^H (rx_cov)^{-1}, the expected-MSE-optimal linear combiner."""
    return herm(solve_hermitian_pd(hermitize(rx_cov), h_eff @ precoder))


def update_combiners(
    est: ChannelEstimates, err: ErrorCovariances, theta, state: BeamformingState, cfg: SystemConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """Expected-MMSE combiners for both users at the current precoders."""
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    aux = build_aux(est, err, theta, u_cov, v_cov)
    eff = compose_effective_channels(est, theta)
    f_k = _mmse_combiner(_rx_cov_ul(aux, cfg), eff.h_bar_k, state.u_k)
    f_j = _mmse_combiner(_rx_cov_dl(aux, cfg), eff.h_bar_j, state.v_j)
    return f_k, f_j


def _mse_one_side(
    f: np.ndarray, rx_cov: np.ndarray, h_eff: np.ndarray, precoder: np.ndarray
) -> np.ndarray:
    """E[(F y - s)(F y - s)^H] for unit-power streams."""
    signal = f @ h_eff @ precoder
    e = f @ rx_cov @ herm(f) - signal - herm(signal) + np.eye(precoder.shape[1], dtype=complex)
    return hermitize(e)


def expected_mse(
    est: ChannelEstimates, err: ErrorCovariances, theta, state: BeamformingState, cfg: SystemConfig
) -> ExpectedMse:
    """Expected stream MSE matrices at the current state."""
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    aux = build_aux(est, err, theta, u_cov, v_cov)
    eff = compose_effective_channels(est, theta)
    e_k = _mse_one_side(state.f_k, _rx_cov_ul(aux, cfg), eff.h_bar_k, state.u_k)
    e_j = _mse_one_side(state.f_j, _rx_cov_dl(aux, cfg), eff.h_bar_j, state.v_j)
    return ExpectedMse(e_k=e_k, e_j=e_j)


def update_weights(mse: ExpectedMse, cfg: SystemConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Rate-weighted inverse-MSE weights (natural-log factor folded in)."""
    w_k = (cfg.wk / LN2) * solve_hermitian_pd(mse.e_k, np.eye(mse.e_k.shape[0], dtype=complex))
    w_j = (cfg.wj / LN2) * solve_hermitian_pd(mse.e_j, np.eye(mse.e_j.shape[0], dtype=complex))
    return hermitize(w_k), hermitize(w_j)


def build_x_matrices(
    est: ChannelEstimates, err: ErrorCovariances, theta, state: BeamformingState
) -> Tuple[np.ndarray, np.ndarray]:
    """Quadratic coefficients of both precoder subproblems.

    Each is the sum of the expected mirrored quadratics of the two routes the
    precoder excites: its own signal route at its serving receiver plus the
    interference route at the other receiver.
    """
    link = lambda name: link_triple(est, err, name)
    m_ul = herm(state.f_k) @ state.w_k @ state.f_k
    m_dl = herm(state.f_j) @ state.w_j @ state.f_j
    x_k = expect_eff_hhx(
        link("h_k"), link("h_0theta"), link("h_thetak"), theta, m_ul
    ) + expect_eff_hhx(link("h_jk"), link("h_jtheta"), link("h_thetak"), theta, m_dl)
    x_j = expect_eff_hhx(
        link("h_j"), link("h_jtheta"), link("h_theta0"), theta, m_dl
    ) + expect_eff_hhx(link("h_0"), link("h_0theta"), link("h_theta0"), theta, m_ul)
    return hermitize(x_k), hermitize(x_j)


def solve_power_constrained(
    x_mat: np.ndarray,
    rhs: np.ndarray,
    budget: float,
    tol_abs: Optional[float] = None,
    max_iters: int = 200,
) -> Tuple[np.ndarray, float]:
    """Minimize the quadratic surrogate subject to a Frobenius power budget.

    Returns ((X + lam I)^+ rhs, lam) with lam = 0 whenever the unconstrained
    (pseudo-inverse) solution already fits the budget, else the bisected
    multiplier.  The power curve power(lam) = sum_i s_i / (v_i + lam)^2 is
    evaluated in the eigenbasis of X; rank-deficient directions carry no
    right-hand side at optimality and are treated as zero-power.
    """
    if budget <= 0.0:
        raise ValueError("power budget must be > 0")
    tol = 1e-6 * budget if tol_abs is None else tol_abs
    vals, vecs = np.linalg.eigh(hermitize(x_mat))
    vals = np.clip(vals, 0.0, None)
    r_proj = herm(vecs) @ rhs
    s_diag = np.sum(np.abs(r_proj) ** 2, axis=1)
    # Directions numerically in the null space of X must carry no power at
    # lam = 0 (the rhs lies in range(X) at any stationary point).
    scale = float(vals[-1]) if vals.size else 0.0
    null_cut = 1e-14 * max(scale, 1e-300)
    s_cut = 1e-12 * max(float(np.max(s_diag)) if s_diag.size else 0.0, 1e-300)

    def power(lam: float) -> float:
        denom = vals + lam
        live = denom > null_cut
        out = float(np.sum(s_diag[live] / denom[live] ** 2))
        if np.any(~live & (s_diag > s_cut)):
            return np.inf  # singular direction with signal: infinite power at this lam
        return out

    def precoder(lam: float) -> np.ndarray:
        denom = vals + lam
        inv = np.where(denom > null_cut, 1.0 / np.where(denom > null_cut, denom, 1.0), 0.0)
        return vecs @ (inv[:, None] * r_proj)

    if power(0.0) <= budget * (1.0 + 1e-12):
        return precoder(0.0), 0.0

    lo, hi = 0.0, 1.0
    grow = 0
    while power(hi) > budget:
        lo, hi = hi, 2.0 * hi
        grow += 1
        if grow > max_iters:
            raise RuntimeError(
                f"power bisection failed to bracket: budget={budget:.3e}, "
                f"power({hi:.3e})={power(hi):.3e}"
            )
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        if power(mid) > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(hi, 1.0):
            break
    lam = hi  # feasible endpoint
    p = power(lam)
    if abs(p - budget) > tol and lam * abs(p - budget) > tol:
        raise RuntimeError(
            f"power bisection did not converge: budget={budget:.6e}, power={p:.6e}, "
            f"lam={lam:.6e}, bracket width={hi - lo:.3e}"
        )
    return precoder(lam), lam


def update_precoders(
    est: ChannelEstimates,
    err: ErrorCovariances,
    theta,
    state: BeamformingState,
    cfg: SystemConfig,
    opts: SolverOptions = SolverOptions(),
) -> Tuple[np.ndarray, np.ndarray, float, float]:
    """Power-constrained precoder updates for both links at current F, W."""
    x_k, x_j = build_x_matrices(est, err, theta, state)
    eff = compose_effective_channels(est, theta)
    rhs_k = herm(eff.h_bar_k) @ herm(state.f_k) @ state.w_k
    rhs_j = herm(eff.h_bar_j) @ herm(state.f_j) @ state.w_j
    u_k, lambda_k = solve_power_constrained(
        x_k, rhs_k, cfg.alphak, opts.bisection_tol, opts.max_bisection_iters
    )
    v_j, lambda_0 = solve_power_constrained(
        x_j, rhs_j, cfg.alpha0, opts.bisection_tol, opts.max_bisection_iters
    )
    return u_k, v_j, lambda_k, lambda_0


def _init_precoder(h_eff: np.ndarray, streams: int, budget: float, policy: str, rng) -> np.ndarray:
    dim = h_eff.shape[1]
    if policy == "svd_estimate":
        _, _, vh = np.linalg.svd(h_eff)
        cols = herm(vh)[:, :streams]
    elif policy == "scaled_identity":
        cols = np.eye(dim, streams, dtype=complex)
    elif policy == "random":
        if rng is None:
            raise ValueError("init_policy='random' requires an rng")
        g = rng.standard_normal((dim, streams)) + 1j * rng.standard_normal((dim, streams))
        cols, _ = np.linalg.qr(g)
        cols = cols[:, :streams]
    else:
        raise ValueError(f"unknown init_policy {policy!r}")
    return cols * np.sqrt(budget / streams)


def init_state(
    est: ChannelEstimates,
    cfg: SystemConfig,
    opts: SolverOptions = SolverOptions(),
    rng=None,
    theta_init: Optional[IrsPhase] = None,
) -> BeamformingState:
    """Starting point: budget-scaled precoders, all-ones phases, unit weights."""
    theta = theta_init if theta_init is not None else IrsPhase.ones(cfg.rc)
    eff = compose_effective_channels(est, theta)
    u_k = _init_precoder(eff.h_bar_k, cfg.uk, cfg.alphak, opts.init_policy, rng)
    v_j = _init_precoder(eff.h_bar_j, cfg.vj, cfg.alpha0, opts.init_policy, rng)
    return BeamformingState(
        u_k=u_k,
        v_j=v_j,
        f_k=np.zeros((cfg.uk, cfg.n0), dtype=complex),
        f_j=np.zeros((cfg.vj, cfg.nj), dtype=complex),
        w_k=np.eye(cfg.uk, dtype=complex),
        w_j=np.eye(cfg.vj, dtype=complex),
        theta=theta,
        lambda_k=0.0,
        lambda_0=0.0,
    )


def _sweep_once(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
    opts: SolverOptions,
) -> BeamformingState:
    """One outer sweep: combiners, weights, precoders, then phases.

    Both combiner/weight pairs are refreshed at the incoming precoders before
    either precoder moves.  Every block is then an exact maximizer of the
    same concave surrogate, which makes the rate bound non-decreasing from
    sweep to sweep (the surrogate equals the bound right after the weight
    updates and can only grow afterwards).
    """
    theta = state.theta
    f_k, f_j = update_combiners(est, err, theta, state, cfg)
    stage = replace(state, f_k=f_k, f_j=f_j)
    w_k, w_j = update_weights(expected_mse(est, err, theta, stage, cfg), cfg)
    stage = replace(stage, w_k=w_k, w_j=w_j)
    u_k, v_j, lambda_k, lambda_0 = update_precoders(est, err, theta, stage, cfg, opts)
    stage = replace(stage, u_k=u_k, v_j=v_j, lambda_k=lambda_k, lambda_0=lambda_0)

    if opts.optimize_irs:
        s_mat, t_mat, z_mat = build_stz(est, err, stage, cfg)
        prob = build_mm_problem(s_mat, t_mat, z_mat)
        theta_new = run_mm_phase_opt(prob, theta, opts.mm)
        stage = replace(stage, theta=theta_new)
    return stage


def run_alternating_solver(
    est: ChannelEstimates,
    err: ErrorCovariances,
    cfg: SystemConfig,
    opts: SolverOptions = SolverOptions(),
    rng=None,
    theta_init: Optional[IrsPhase] = None,
) -> Tuple[BeamformingState, List[SweepTrace]]:
    """Full alternating optimization from a fresh initial point.

    Returns the final state and the per-sweep trace; trace[0] is the initial
    point, so a run with max_outer_iters = n yields at most n + 1 records.
    """
    state = init_state(est, cfg, opts, rng=rng, theta_init=theta_init)
    trace = [_trace_record(0, est, err, state, cfg)]
    prev = trace[0].wsr_lb
    for it in range(1, opts.max_outer_iters + 1):
        state = _sweep_once(est, err, state, cfg, opts)
        rec = _trace_record(it, est, err, state, cfg)
        trace.append(rec)
        if abs(rec.wsr_lb - prev) <= opts.outer_tol * max(abs(rec.wsr_lb), 1e-300):
            break
        prev = rec.wsr_lb
    return state, trace


def _trace_record(iteration, est, err, state, cfg) -> SweepTrace:
    report = rate_mod.ergodic_wsr_lb(est, err, state, cfg)
    return SweepTrace(
        iteration=iteration,
        wsr_lb=report.wsr_total,
        power_ul=float(np.sum(np.abs(state.u_k) ** 2)),
        power_dl=float(np.sum(np.abs(state.v_j) ** 2)),
        lambda_k=state.lambda_k,
        lambda_0=state.lambda_0,
    )


# ---------------------------------------------------------------------------
# Deterministic-channel reference path.
#
# A textbook weighted-MMSE sweep that treats the estimates as exact (no
# expectation plumbing anywhere): receive covariances are formed directly
# from the composed channels, the power multiplier is found by re-solving
# (X + lam I) P = R per probe, and the phase step builds its matrices from
# plain products.  With all error covariances zero the main path must
# reproduce it block for block; the test suite enforces that.
# ---------------------------------------------------------------------------


def _direct_power_solve(x_mat, rhs, budget, max_iters=200):
    dim = x_mat.shape[0]

    def solve_at(lam):
        return np.linalg.solve(x_mat + lam * np.eye(dim), rhs)

    def power(lam):
        return float(np.sum(np.abs(solve_at(lam)) ** 2))

    try:
        p0 = power(0.0)
    except np.linalg.LinAlgError:
        p0 = np.inf
    if p0 <= budget * (1.0 + 1e-12):
        return solve_at(0.0), 0.0
    lo, hi = 0.0, 1.0
    while power(hi) > budget:
        lo, hi = hi, 2.0 * hi
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        if power(mid) > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(hi, 1.0):
            break
    return solve_at(hi), hi


def reference_perfect_csi_sweep(
    est: ChannelEstimates,
    state: BeamformingState,
    cfg: SystemConfig,
    opts: SolverOptions = SolverOptions(),
) -> BeamformingState:
    """One deterministic-channel weighted-MMSE sweep in the main-path order."""
    theta = state.theta
    eff = compose_effective_channels(est, theta)
    eye_ul = cfg.sigma0_sq * np.eye(cfg.n0, dtype=complex)
    eye_dl = cfg.sigmaj_sq * np.eye(cfg.nj, dtype=complex)

    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    rx_ul = eff.h_bar_k @ u_cov @ herm(eff.h_bar_k)
    rx_ul = rx_ul + eff.h_bar_0 @ v_cov @ herm(eff.h_bar_0) + eye_ul
    rx_dl = eff.h_bar_j @ v_cov @ herm(eff.h_bar_j)
    rx_dl = rx_dl + eff.h_bar_jk @ u_cov @ herm(eff.h_bar_jk) + eye_dl
    f_k = _mmse_combiner(rx_ul, eff.h_bar_k, state.u_k)
    f_j = _mmse_combiner(rx_dl, eff.h_bar_j, state.v_j)
    e_k = _mse_one_side(f_k, rx_ul, eff.h_bar_k, state.u_k)
    e_j = _mse_one_side(f_j, rx_dl, eff.h_bar_j, state.v_j)
    w_k = hermitize((cfg.wk / LN2) * np.linalg.inv(e_k))
    w_j = hermitize((cfg.wj / LN2) * np.linalg.inv(e_j))

    m_ul = herm(f_k) @ w_k @ f_k
    m_dl = herm(f_j) @ w_j @ f_j
    x_k = herm(eff.h_bar_k) @ m_ul @ eff.h_bar_k + herm(eff.h_bar_jk) @ m_dl @ eff.h_bar_jk
    x_j = herm(eff.h_bar_j) @ m_dl @ eff.h_bar_j + herm(eff.h_bar_0) @ m_ul @ eff.h_bar_0
    u_k, lambda_k = _direct_power_solve(
        hermitize(x_k), herm(eff.h_bar_k) @ herm(f_k) @ w_k, cfg.alphak
    )
    v_j, lambda_0 = _direct_power_solve(
        hermitize(x_j), herm(eff.h_bar_j) @ herm(f_j) @ w_j, cfg.alpha0
    )

    stage = BeamformingState(
        u_k=u_k, v_j=v_j, f_k=f_k, f_j=f_j, w_k=w_k, w_j=w_j,
        theta=theta, lambda_k=lambda_k, lambda_0=lambda_0,
    )
    if opts.optimize_irs:
        u_cov = u_k @ herm(u_k)
        v_cov = v_j @ herm(v_j)
        t_mat = est.h_thetak @ u_cov @ herm(est.h_thetak) + est.h_theta0 @ v_cov @ herm(est.h_theta0)
        z_mat = herm(est.h_0theta) @ m_ul @ est.h_0theta + herm(est.h_jtheta) @ m_dl @ est.h_jtheta
        s_mat = (
            est.h_thetak @ u_cov @ herm(est.h_k) @ m_ul @ est.h_0theta
            + est.h_theta0 @ v_cov @ herm(est.h_0) @ m_ul @ est.h_0theta
            + est.h_theta0 @ v_cov @ herm(est.h_j) @ m_dl @ est.h_jtheta
            + est.h_thetak @ u_cov @ herm(est.h_jk) @ m_dl @ est.h_jtheta
            - est.h_thetak @ u_k @ w_k @ f_k @ est.h_0theta
            - est.h_theta0 @ v_j @ w_j @ f_j @ est.h_jtheta
        )
        prob = build_mm_problem(s_mat, hermitize(t_mat), hermitize(z_mat))
        stage = replace(stage, theta=run_mm_phase_opt(prob, theta, opts.mm))
    return stage
