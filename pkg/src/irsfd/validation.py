"""Numerical oracle suite for every closed-form quantity in the package.

Each check recomputes one analytic result by an independent route - Monte
Carlo sampling, scalar loops, dense grid search, or feasible perturbations -
and reports the measured error against a pinned tolerance.  The suite backs
the CLI `validate` verb and is reused by the tests, so a regression shows up
as a number, not just a boolean.

Checks accept an optional replacement for the function under test (e.g.
``sigma_fn``) so a deliberately broken implementation can be injected to
prove the oracle actually discriminates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .ewmmse import (
    SolverOptions,
    expected_mse,
    init_state,
    reference_perfect_csi_sweep,
    run_alternating_solver,
    solve_power_constrained,
    update_combiners,
    update_precoders,
    update_weights,
    _direct_power_solve,
)
from .irs_mm import MmOptions, build_mm_problem, build_stz, mm_objective, mm_step
from .kron_expectation import (
    build_aux,
    build_sigma,
    expect_eff_hhx,
    expect_eff_hxh,
    expect_hhx,
    expect_hxh,
    link_triple,
)
from .linalg import herm, hermitize, psd_sqrt, rand_cn
from .rate import ergodic_wsr_lb, monte_carlo_wsr, monte_carlo_wsr_fixed_rx
from .baselines import SchemeId, solve_scheme
from .channel_gen import ErrorSampler
from .system_model import (
    LINK_NAMES,
    BeamformingState,
    ChannelEstimates,
    CovPair,
    ErrorCovariances,
    IrsPhase,
    SystemConfig,
    compose_effective_channels,
    link_shapes,
    theta_vector,
)

LN2 = float(np.log(2.0))


# ---------------------------------------------------------------------------
# Random instance builders (shared with the test suite).
# ---------------------------------------------------------------------------


def make_cfg(
    m0: int = 3,
    n0: int = 3,
    mk: int = 3,
    nj: int = 3,
    uk: int = 2,
    vj: int = 2,
    irs_rows: int = 1,
    irs_cols: int = 3,
    alpha0: float = 3.0,
    alphak: float = 2.0,
    sigma0_sq: float = 0.5,
    sigmaj_sq: float = 0.7,
    wk: float = 1.0,
    wj: float = 1.2,
) -> SystemConfig:
    """Small everything-different system used by the oracle checks."""
    return SystemConfig(
        m0=m0, n0=n0, mk=mk, nj=nj, uk=uk, vj=vj,
        irs_rows=irs_rows, irs_cols=irs_cols,
        alpha0=alpha0, alphak=alphak,
        sigma0_sq=sigma0_sq, sigmaj_sq=sigmaj_sq, wk=wk, wj=wj,
    )


def random_psd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian PSD matrix with mean diagonal ~= scale."""
    a = rand_cn(rng, n, n)
    m = a @ herm(a) + 0.05 * np.eye(n)
    m = m * (scale * n / float(np.trace(m).real))
    return hermitize(m)


def random_estimates(
    cfg: SystemConfig, rng: np.random.Generator, scale: float = 1.0
) -> ChannelEstimates:
    shapes = link_shapes(cfg)
    return ChannelEstimates(
        **{name: scale * rand_cn(rng, *shapes[name]) for name in LINK_NAMES}
    )


def random_covariances(
    cfg: SystemConfig, rng: np.random.Generator, scale: float = 0.3
) -> ErrorCovariances:
    """Random non-identity Hermitian-PSD factor pairs for all eight links."""
    shapes = link_shapes(cfg)
    pairs = {}
    for name in LINK_NAMES:
        rows, cols = shapes[name]
        pairs[name] = CovPair(
            j_cov=random_psd(rng, cols, 1.0), k_cov=random_psd(rng, rows, scale)
        )
    return ErrorCovariances(**pairs)


def random_phase(cfg: SystemConfig, rng: np.random.Generator) -> IrsPhase:
    return IrsPhase(np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cfg.rc)))


def random_state(
    cfg: SystemConfig, rng: np.random.Generator, power_frac: float = 0.9
) -> BeamformingState:
    """Feasible random state with PD weights and random phases."""

    def scaled(rows, cols, budget):
        p = rand_cn(rng, rows, cols)
        return p * np.sqrt(power_frac * budget / float(np.sum(np.abs(p) ** 2)))

    return BeamformingState(
        u_k=scaled(cfg.mk, cfg.uk, cfg.alphak),
        v_j=scaled(cfg.m0, cfg.vj, cfg.alpha0),
        f_k=0.3 * rand_cn(rng, cfg.uk, cfg.n0),
        f_j=0.3 * rand_cn(rng, cfg.vj, cfg.nj),
        w_k=random_psd(rng, cfg.uk, 1.0),
        w_j=random_psd(rng, cfg.vj, 1.0),
        theta=random_phase(cfg, rng),
        lambda_k=0.0,
        lambda_0=0.0,
    )


def random_instance(
    rng: np.random.Generator, cov_scale: float = 0.3, **cfg_kwargs
) -> Tuple[SystemConfig, ChannelEstimates, ErrorCovariances, BeamformingState]:
    cfg = make_cfg(**cfg_kwargs)
    est = random_estimates(cfg, rng)
    err = random_covariances(cfg, rng, cov_scale)
    state = random_state(cfg, rng)
    return cfg, est, err, state


# ---------------------------------------------------------------------------
# Monte-Carlo reference paths.
# ---------------------------------------------------------------------------


def batch_errors(
    j_cov: np.ndarray, k_cov: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n joint draws of the separable-covariance error matrix, stacked."""
    k_s = psd_sqrt(k_cov)
    jt_s = psd_sqrt(j_cov.T)
    g = rand_cn(rng, n, k_cov.shape[0], j_cov.shape[0])
    return np.einsum("ij,njk,kl->nil", k_s, g, jt_s, optimize=True)


def mc_second_moments(
    h_hat: np.ndarray,
    j_cov: np.ndarray,
    k_cov: np.ndarray,
    x: np.ndarray,
    m: np.ndarray,
    n: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sample means of H X H^H and H^H M H over joint error draws."""
    h = h_hat[None, :, :] + batch_errors(j_cov, k_cov, n, rng)
    fwd = np.einsum("nij,jk,nlk->il", h, x, h.conj(), optimize=True) / n
    rev = np.einsum("nji,jk,nkl->il", h.conj(), m, h, optimize=True) / n
    return fwd, rev


def mc_effective_second_moments(
    d, a, b, theta, x: np.ndarray, m: np.ndarray, n: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Sample means of Heff X Heff^H and Heff^H M Heff, Heff = D + A diag(tv) B."""
    tv = theta_vector(theta)
    d_hat, d_j, d_k = d
    a_hat, a_j, a_k = a
    b_hat, b_j, b_k = b
    dd = d_hat[None] + batch_errors(d_j, d_k, n, rng)
    aa = a_hat[None] + batch_errors(a_j, a_k, n, rng)
    bb = b_hat[None] + batch_errors(b_j, b_k, n, rng)
    eff = dd + aa @ (tv[None, :, None] * bb)
    fwd = np.einsum("nij,jk,nlk->il", eff, x, eff.conj(), optimize=True) / n
    rev = np.einsum("nji,jk,nkl->il", eff.conj(), m, eff, optimize=True) / n
    return fwd, rev


def mc_sigma(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
    n: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo interference-plus-noise covariances at both receivers.

    Per receiver: sample mean of the realized signal-route covariances, minus
    the deterministic own-signal estimate term, plus the noise floor.
    """
    sampler = ErrorSampler(est, err)
    acc_ul = np.zeros((cfg.n0, cfg.n0), dtype=complex)
    acc_dl = np.zeros((cfg.nj, cfg.nj), dtype=complex)
    for _ in range(n):
        eff = compose_effective_channels(sampler.draw(rng), state.theta)
        su = eff.h_bar_k @ state.u_k
        si = eff.h_bar_0 @ state.v_j
        sd = eff.h_bar_j @ state.v_j
        sx = eff.h_bar_jk @ state.u_k
        acc_ul += su @ herm(su) + si @ herm(si)
        acc_dl += sd @ herm(sd) + sx @ herm(sx)
    eff0 = compose_effective_channels(est, state.theta)
    own_ul = eff0.h_bar_k @ state.u_k
    own_dl = eff0.h_bar_j @ state.v_j
    sigma_ul = acc_ul / n - own_ul @ herm(own_ul) + cfg.sigma0_sq * np.eye(cfg.n0)
    sigma_dl = acc_dl / n - own_dl @ herm(own_dl) + cfg.sigmaj_sq * np.eye(cfg.nj)
    return sigma_ul, sigma_dl


def mc_expected_mse(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
    n: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo stream-error covariances at both receivers.

    Symbol and noise expectations are closed-form per channel draw; only the
    channel errors are sampled, matching what the analytic path integrates.
    """
    sampler = ErrorSampler(est, err)
    e_ul = np.zeros((cfg.uk, cfg.uk), dtype=complex)
    e_dl = np.zeros((cfg.vj, cfg.vj), dtype=complex)
    eye_ul = cfg.sigma0_sq * np.eye(cfg.n0)
    eye_dl = cfg.sigmaj_sq * np.eye(cfg.nj)
    for _ in range(n):
        eff = compose_effective_channels(sampler.draw(rng), state.theta)
        su = eff.h_bar_k @ state.u_k
        si = eff.h_bar_0 @ state.v_j
        rx_ul = su @ herm(su) + si @ herm(si) + eye_ul
        sd = eff.h_bar_j @ state.v_j
        sx = eff.h_bar_jk @ state.u_k
        rx_dl = sd @ herm(sd) + sx @ herm(sx) + eye_dl
        sig_ul = state.f_k @ su
        sig_dl = state.f_j @ sd
        e_ul += state.f_k @ rx_ul @ herm(state.f_k) - sig_ul - herm(sig_ul)
        e_dl += state.f_j @ rx_dl @ herm(state.f_j) - sig_dl - herm(sig_dl)
    return e_ul / n + np.eye(cfg.uk), e_dl / n + np.eye(cfg.vj)


def weighted_mse_trace(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
) -> float:
    """tr(W_k E_k) + tr(W_j E_j) at the state's combiners and weights."""
    mse = expected_mse(est, err, state.theta, state, cfg)
    return float(
        np.trace(state.w_k @ mse.e_k).real + np.trace(state.w_j @ mse.e_j).real
    )


# ---------------------------------------------------------------------------
# Check implementations.  Each returns (error, tol, detail).
# ---------------------------------------------------------------------------


def _rel(err_mat: np.ndarray, ref_mat: np.ndarray) -> float:
    return float(
        np.linalg.norm(err_mat - ref_mat) / max(np.linalg.norm(ref_mat), 1e-300)
    )


def check_single_link_second_moment(
    rng: np.random.Generator, n_draws: int = 100_000, n_instances: int = 6
):
    """expect_hxh / expect_hhx against vectorized Monte Carlo."""
    worst = 0.0
    for _ in range(n_instances):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(2, 5))
        h = rand_cn(rng, rows, cols)
        j = random_psd(rng, cols)
        k = random_psd(rng, rows)
        x = hermitize(rand_cn(rng, cols, cols))
        m = hermitize(rand_cn(rng, rows, rows))
        fwd_mc, rev_mc = mc_second_moments(h, j, k, x, m, n_draws, rng)
        worst = max(worst, _rel(fwd_mc, expect_hxh(h, j, k, x)))
        worst = max(worst, _rel(rev_mc, expect_hhx(h, j, k, x=m)))
    return worst, 0.02, f"{n_instances} instances x {n_draws} draws"


def check_effective_composition_scalar(rng: np.random.Generator):
    """compose_effective_channels against an explicit scalar triple loop."""
    cfg = make_cfg()
    est = random_estimates(cfg, rng)
    theta = random_phase(cfg, rng)
    tv = theta_vector(theta)
    eff = compose_effective_channels(est, theta)
    routes = [
        (eff.h_bar_k, est.h_k, est.h_0theta, est.h_thetak),
        (eff.h_bar_0, est.h_0, est.h_0theta, est.h_theta0),
        (eff.h_bar_j, est.h_j, est.h_jtheta, est.h_theta0),
        (eff.h_bar_jk, est.h_jk, est.h_jtheta, est.h_thetak),
    ]
    worst = 0.0
    for got, d, a, b in routes:
        ref = np.empty_like(d)
        for r in range(d.shape[0]):
            for c in range(d.shape[1]):
                acc = d[r, c]
                for e in range(cfg.rc):
                    acc += a[r, e] * tv[e] * b[e, c]
                ref[r, c] = acc
        worst = max(worst, _rel(got, ref))
    return worst, 1e-12, "4 composed routes, scalar loop"


def check_effective_second_moment(rng: np.random.Generator, n_draws: int = 60_000):
    """Composite-channel second moments against joint Monte Carlo."""
    cfg = make_cfg()
    est = random_estimates(cfg, rng)
    err = random_covariances(cfg, rng)
    theta = random_phase(cfg, rng)
    d = link_triple(est, err, "h_k")
    a = link_triple(est, err, "h_0theta")
    b = link_triple(est, err, "h_thetak")
    x = random_psd(rng, cfg.mk)
    m = hermitize(rand_cn(rng, cfg.n0, cfg.n0))
    fwd_mc, rev_mc = mc_effective_second_moments(d, a, b, theta, x, m, n_draws, rng)
    e1 = _rel(fwd_mc, expect_eff_hxh(d, a, b, theta, x))
    e2 = _rel(rev_mc, expect_eff_hhx(d, a, b, theta, m))
    return max(e1, e2), 0.02, f"{n_draws} joint draws over three links"


def check_receiver_covariance_mc(
    rng: np.random.Generator, n_draws: int = 30_000, sigma_fn: Callable = build_sigma
):
    """build_sigma against the sampled interference-plus-noise covariance."""
    cfg, est, err, state = random_instance(rng)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    got = sigma_fn(est, err, state.theta, u_cov, v_cov, cfg)
    ul_mc, dl_mc = mc_sigma(est, err, state, cfg, n_draws, rng)
    err_val = max(_rel(ul_mc, got.sigma_ul), _rel(dl_mc, got.sigma_dl))
    return err_val, 0.02, f"{n_draws} joint draws, both receivers"


def check_receiver_covariance_identity(rng: np.random.Generator):
    """build_sigma equals the signal-route recombination identity."""
    cfg, est, err, state = random_instance(rng)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    sig = build_sigma(est, err, state.theta, u_cov, v_cov, cfg)
    aux = build_aux(est, err, state.theta, u_cov, v_cov)
    eff = compose_effective_channels(est, state.theta)
    alt_ul = (
        aux.q_k
        + aux.t_0
        + cfg.sigma0_sq * np.eye(cfg.n0)
        - eff.h_bar_k @ u_cov @ herm(eff.h_bar_k)
    )
    alt_dl = (
        aux.t_j
        + aux.q_jk
        + cfg.sigmaj_sq * np.eye(cfg.nj)
        - eff.h_bar_j @ v_cov @ herm(eff.h_bar_j)
    )
    err_val = max(_rel(alt_ul, sig.sigma_ul), _rel(alt_dl, sig.sigma_dl))
    return err_val, 1e-10, "route recombination, both receivers"


def check_expected_mse_mc(rng: np.random.Generator, n_draws: int = 30_000):
    """expected_mse against Monte Carlo over channel-error draws."""
    cfg, est, err, state = random_instance(rng)
    mse = expected_mse(est, err, state.theta, state, cfg)
    e_ul, e_dl = mc_expected_mse(est, err, state, cfg, n_draws, rng)
    err_val = max(_rel(e_ul, mse.e_k), _rel(e_dl, mse.e_j))
    return err_val, 0.02, f"{n_draws} joint draws, both stream-error matrices"


def check_bound_below_sample_mean(
    rng: np.random.Generator, n_draws: int = 4000, n_instances: int = 3
):
    """Analytic rate bound never exceeds the sampled mean plus noise margin."""
    worst = -np.inf
    for _ in range(n_instances):
        cfg, est, err, state = random_instance(rng, cov_scale=0.2)
        lb = ergodic_wsr_lb(est, err, state, cfg)
        mc = monte_carlo_wsr(est, err, state, cfg, n_draws, rng)
        margin = (lb.wsr_total - mc.wsr_total) / max(mc.stderr, 1e-12)
        worst = max(worst, margin)
    return worst, 3.0, "max (bound - sample mean) / stderr; bound should sit below"


def check_rate_sandwich(
    rng: np.random.Generator, n_draws: int = 2500, n_instances: int = 3
):
    """Bound <= designed-receiver mean <= genie-receiver mean, within noise.

    Uses expected-MMSE combiners, the configuration where the analytic bound
    provably sits below the designed-receiver Monte Carlo, which in turn sits
    below the per-draw ideal receiver.  Both estimators see identical draws.
    """
    worst = -np.inf
    for _ in range(n_instances):
        cfg, est, err, state = random_instance(rng, cov_scale=0.1)
        f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
        state = replace(state, f_k=f_k, f_j=f_j)
        lb = ergodic_wsr_lb(est, err, state, cfg)
        seed = int(rng.integers(2**32))
        fixed = monte_carlo_wsr_fixed_rx(
            est, err, state, cfg, n_draws, np.random.default_rng(seed)
        )
        genie = monte_carlo_wsr(
            est, err, state, cfg, n_draws, np.random.default_rng(seed)
        )
        lower = (lb.wsr_total - fixed.wsr_total) / max(fixed.stderr, 1e-12)
        pair_noise = max(float(np.hypot(fixed.stderr, genie.stderr)), 1e-12)
        upper = (fixed.wsr_total - genie.wsr_total) / pair_noise
        worst = max(worst, lower, upper)
    return worst, 3.0, "max normalized violation of the two orderings"


def check_combiner_optimality(rng: np.random.Generator, n_trials: int = 100):
    """Returned combiners minimize the weighted expected MSE trace."""
    cfg, est, err, state = random_instance(rng)
    f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
    base = replace(state, f_k=f_k, f_j=f_j)
    j_opt = weighted_mse_trace(est, err, base, cfg)
    worst = -np.inf
    scale_k = np.linalg.norm(f_k)
    scale_j = np.linalg.norm(f_j)
    for _ in range(n_trials):
        cand = replace(
            base,
            f_k=f_k + 1e-3 * scale_k * rand_cn(rng, *f_k.shape),
            f_j=f_j + 1e-3 * scale_j * rand_cn(rng, *f_j.shape),
        )
        worst = max(worst, j_opt - weighted_mse_trace(est, err, cand, cfg))
    return worst, 1e-10 * max(1.0, abs(j_opt)), f"{n_trials} perturbed combiner pairs"


def check_weight_identity(rng: np.random.Generator):
    """Weight update inverts the expected MSE exactly."""
    cfg, est, err, state = random_instance(rng)
    f_k, f_j = update_combiners(est, err, state.theta, state, cfg)
    stage = replace(state, f_k=f_k, f_j=f_j)
    mse = expected_mse(est, err, state.theta, stage, cfg)
    w_k, w_j = update_weights(mse, cfg)
    e1 = _rel(w_k @ mse.e_k, (cfg.wk / LN2) * np.eye(cfg.uk))
    e2 = _rel(w_j @ mse.e_j, (cfg.wj / LN2) * np.eye(cfg.vj))
    return max(e1, e2), 1e-10, "W E = (w/ln2) I on both sides"


def check_precoder_kkt(rng: np.random.Generator, n_candidates: int = 50):
    """Precoder update satisfies stationarity, feasibility, complementarity,
    and beats random feasible candidates on the quadratic objective."""
    from .ewmmse import build_x_matrices

    cfg, est, err, state = random_instance(rng)
    u_k, v_j, lam_k, lam_0 = update_precoders(est, err, state.theta, state, cfg)
    x_k, x_j = build_x_matrices(est, err, state.theta, state)
    eff = compose_effective_channels(est, state.theta)
    rhs_k = herm(eff.h_bar_k) @ herm(state.f_k) @ state.w_k
    rhs_j = herm(eff.h_bar_j) @ herm(state.f_j) @ state.w_j
    worst = 0.0
    details = []
    for p, lam, x, r, budget in (
        (u_k, lam_k, x_k, rhs_k, cfg.alphak),
        (v_j, lam_0, x_j, rhs_j, cfg.alpha0),
    ):
        dim = x.shape[0]
        stat = np.linalg.norm((x + lam * np.eye(dim)) @ p - r) / max(
            np.linalg.norm(r), 1e-300
        )
        power = float(np.sum(np.abs(p) ** 2))
        feas = max(0.0, power - budget) / budget
        compl = abs(lam * (power - budget)) / budget
        worst = max(worst, stat / 1e-8, feas / 1e-9, compl / 1e-6)
        details.append(f"stat={stat:.2e} feas={feas:.2e} compl={compl:.2e}")

        def objective(q):
            quad = float(np.real(np.trace(herm(q) @ x @ q)))
            lin = 2.0 * float(np.real(np.trace(herm(q) @ r)))
            return quad - lin

        j_opt = objective(p)
        for _ in range(n_candidates):
            cand = rand_cn(rng, *p.shape)
            cand *= np.sqrt(budget / float(np.sum(np.abs(cand) ** 2)))
            gap = j_opt - objective(cand)
            worst = max(worst, gap / (1e-9 * max(1.0, abs(j_opt))))
    return worst, 1.0, "; ".join(details) + " (all ratios vs their own tolerance)"


def check_power_curve(rng: np.random.Generator, n_grid: int = 12):
    """Eigen-basis power solver against dense per-probe linear solves."""
    worst = 0.0
    for near_singular in (False, True):
        dim = 4
        a = rand_cn(rng, dim, dim)
        x = hermitize(a @ herm(a))
        if near_singular:
            vals, vecs = np.linalg.eigh(x)
            vals[0] = 1e-14 * vals[-1]
            x = hermitize(vecs @ np.diag(vals) @ herm(vecs))
        rhs = x @ rand_cn(rng, dim, 2)  # keep the rhs in range(X)
        budget = 0.05 * float(np.sum(np.abs(np.linalg.pinv(x) @ rhs) ** 2)) + 0.1
        p1, lam1 = solve_power_constrained(x, rhs, budget)
        p2, lam2 = _direct_power_solve(x + 1e-13 * np.eye(dim), rhs, budget)
        worst = max(worst, _rel(p1, p2) / 1e-6)
        worst = max(worst, abs(lam1 - lam2) / (1e-6 * (1.0 + lam1)))
        lams = np.linspace(0.1, 5.0, n_grid)
        powers = [
            float(np.sum(np.abs(np.linalg.solve(x + l * np.eye(dim), rhs)) ** 2))
            for l in lams
        ]
        worst = max(worst, float(np.max(np.diff(powers))) / 1e-12)
    # Slack case: huge budget keeps the multiplier at zero.
    a = rand_cn(rng, 3, 3)
    x = hermitize(a @ herm(a) + 0.5 * np.eye(3))
    rhs = rand_cn(rng, 3, 2)
    _, lam = solve_power_constrained(x, rhs, 1e9)
    worst = max(worst, 0.0 if lam == 0.0 else np.inf)
    return worst, 1.0, "binding, near-singular, and slack budgets (ratios vs tolerance)"


def check_phase_surrogate_constancy(rng: np.random.Generator, n_thetas: int = 25):
    """Phase quadratic matches the expected weighted MSE up to a constant."""
    cfg, est, err, state = random_instance(rng)
    s_mat, t_mat, z_mat = build_stz(est, err, state, cfg)
    prob = build_mm_problem(s_mat, t_mat, z_mat)
    offsets = []
    for _ in range(n_thetas):
        theta = random_phase(cfg, rng)
        full = weighted_mse_trace(est, err, replace(state, theta=theta), cfg)
        offsets.append(full - mm_objective(prob, theta))
    spread = float(np.max(offsets) - np.min(offsets))
    scale = max(1.0, float(np.mean(np.abs(offsets))))
    return spread / scale, 1e-8, f"offset spread over {n_thetas} random phase vectors"


def check_phase_step_descent(rng: np.random.Generator, n_steps: int = 30):
    """Each majorize-project step keeps unit modulus and never increases
    the quadratic objective."""
    cfg, est, err, state = random_instance(rng)
    s_mat, t_mat, z_mat = build_stz(est, err, state, cfg)
    prob = build_mm_problem(s_mat, t_mat, z_mat)
    tv = theta_vector(random_phase(cfg, rng))
    obj = mm_objective(prob, tv)
    worst_rise = 0.0
    worst_mod = 0.0
    for _ in range(n_steps):
        tv = mm_step(prob, tv)
        worst_mod = max(worst_mod, float(np.max(np.abs(np.abs(tv) - 1.0))))
        new_obj = mm_objective(prob, tv)
        worst_rise = max(worst_rise, new_obj - obj)
        obj = new_obj
    rise_rel = worst_rise / max(1.0, abs(obj))
    err_val = max(rise_rel / 1e-10, worst_mod / 1e-12)
    detail = f"{n_steps} steps; rise={worst_rise:.2e} modulus drift={worst_mod:.2e}"
    return err_val, 1.0, detail


def grid_min_two_elements(prob, step_deg: float = 0.5) -> float:
    """Dense objective minimum over a 2-element phase grid."""
    ang = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    t0 = np.exp(1j * ang)[:, None]
    t1 = np.exp(1j * ang)[None, :]
    sig = prob.big_sigma
    s = prob.s_vec
    obj = (
        sig[0, 0].real
        + sig[1, 1].real
        + 2.0 * np.real(sig[0, 1] * np.conj(t0) * t1)
        + 2.0 * np.real(s[0] * t0)
        + 2.0 * np.real(s[1] * t1)
    )
    return float(np.min(obj)) + prob.const


def check_phase_grid_two_elements(rng: np.random.Generator, n_instances: int = 3):
    """MM fixed point against a half-degree exhaustive 2-element grid."""
    worst = 0.0
    for _ in range(n_instances):
        cfg, est, err, state = random_instance(rng, irs_rows=1, irs_cols=2)
        s_mat, t_mat, z_mat = build_stz(est, err, state, cfg)
        prob = build_mm_problem(s_mat, t_mat, z_mat)
        theta = run_mm_phase_opt_dense(prob, cfg)
        got = mm_objective(prob, theta)
        best = grid_min_two_elements(prob)
        worst = max(worst, abs(got - best) / max(1.0, abs(best)))
    return worst, 1e-3, f"{n_instances} instances, 0.5 degree grid"


def run_mm_phase_opt_dense(prob, cfg: SystemConfig) -> IrsPhase:
    """MM run long enough to be at a fixed point (no early stop)."""
    from .irs_mm import run_mm_phase_opt

    return run_mm_phase_opt(
        prob, IrsPhase.ones(cfg.rc), MmOptions(inner_tol=0.0, max_inner_iters=400)
    )


def check_sweep_monotone(rng: np.random.Generator, n_instances: int = 4):
    """Alternating solver's bound trace never decreases beyond rounding."""
    worst = 0.0
    converged = 0
    opts = SolverOptions(outer_tol=1e-4, max_outer_iters=200)
    for _ in range(n_instances):
        cfg, est, err, _ = random_instance(rng, cov_scale=0.1)
        _, trace = run_alternating_solver(est, err, cfg, opts)
        vals = np.array([t.wsr_lb for t in trace])
        steps = np.diff(vals)
        allowed = -1e-9 * np.maximum(1.0, np.abs(vals[1:]))
        if steps.size:
            worst = max(worst, float(np.max(allowed - steps)))  # > 0 means a drop
        if len(trace) - 1 < opts.max_outer_iters:
            converged += 1
    detail = f"worst drop beyond slack {worst:.2e}; {converged}/{n_instances} converged"
    return max(worst, float(n_instances - converged)), 1e-12, detail


def check_perfect_csi_reduction(rng: np.random.Generator):
    """With zero error covariances one sweep matches the plain-channel path."""
    cfg = make_cfg()
    est = random_estimates(cfg, rng)
    err = ErrorCovariances.zeros(cfg)
    # Fixed shallow phase depth: deep runs eventually project a near-zero
    # step vector whose direction is rounding noise in either path.
    opts = SolverOptions(
        max_outer_iters=1, mm=MmOptions(inner_tol=0.0, max_inner_iters=10)
    )
    got, _ = run_alternating_solver(est, err, cfg, opts)
    ref = reference_perfect_csi_sweep(est, init_state(est, cfg, opts), cfg, opts)
    pairs = [
        (got.f_k, ref.f_k), (got.f_j, ref.f_j),
        (got.w_k, ref.w_k), (got.w_j, ref.w_j),
        (got.u_k, ref.u_k), (got.v_j, ref.v_j),
        (theta_vector(got.theta), theta_vector(ref.theta)),
    ]
    worst = max(_rel(a, b) for a, b in pairs)
    lam_scale = max(1.0, abs(ref.lambda_k), abs(ref.lambda_0))
    worst = max(
        worst,
        abs(got.lambda_k - ref.lambda_k) / lam_scale,
        abs(got.lambda_0 - ref.lambda_0) / lam_scale,
    )
    return worst, 1e-9, "all blocks of one sweep, zero covariances"


def check_scheme_grid_sanity(rng: np.random.Generator):
    """Scheme transforms behave structurally: robust = naive at zero error,
    surface-free designs keep the initial phases, and the half-duplex report
    is exactly half the slot sum."""
    cfg = make_cfg(alphak=5.0, alpha0=5.0)
    est = random_estimates(cfg, rng)
    err = ErrorCovariances.zeros(cfg)
    opts = SolverOptions(outer_tol=1e-6, max_outer_iters=40)
    rng_a = np.random.default_rng(11)
    rng_b = np.random.default_rng(11)
    rb = solve_scheme(
        SchemeId("fd", "with_irs", "robust"), est, err, cfg, opts, rng_a, 10
    )
    nv = solve_scheme(
        SchemeId("fd", "with_irs", "non_robust"), est, err, cfg, opts, rng_b, 10
    )
    worst = abs(rb.report.wsr_total - nv.report.wsr_total) / max(
        1.0, abs(rb.report.wsr_total)
    )
    no_irs = solve_scheme(
        SchemeId("fd", "no_irs", "robust"), est, err, cfg, opts,
        np.random.default_rng(12), 5,
    )
    worst = max(
        worst,
        float(np.max(np.abs(theta_vector(no_irs.states[0].theta) - 1.0))),
    )
    hd = solve_scheme(
        SchemeId("hd", "with_irs", "robust"), est, err, cfg, opts,
        np.random.default_rng(13), 5,
    )
    worst = max(
        worst,
        abs(hd.report.wsr_total - (hd.report.r_ul + hd.report.r_dl))
        / max(1.0, abs(hd.report.wsr_total)),
    )
    return worst, 1e-9, "zero-error scheme grid identities"


def check_generator_determinism(rng: np.random.Generator):
    """Identical seeds reproduce scenarios and solver outputs bitwise."""
    from .channel_gen import GeometryConfig, generate_estimates

    cfg = make_cfg()
    geo = GeometryConfig()
    seed = int(rng.integers(0, 2**31))
    est1 = generate_estimates(cfg, geo, np.random.default_rng(seed))
    est2 = generate_estimates(cfg, geo, np.random.default_rng(seed))
    same = all(
        np.array_equal(getattr(est1, n), getattr(est2, n)) for n in LINK_NAMES
    )
    est3 = generate_estimates(cfg, geo, np.random.default_rng(seed + 1))
    differs = any(
        not np.array_equal(getattr(est1, n), getattr(est3, n)) for n in LINK_NAMES
    )
    err = random_covariances(cfg, np.random.default_rng(seed))
    opts = SolverOptions(max_outer_iters=5)
    s1, _ = run_alternating_solver(est1, err, cfg, opts)
    s2, _ = run_alternating_solver(est2, err, cfg, opts)
    bitwise = np.array_equal(s1.u_k, s2.u_k) and np.array_equal(
        theta_vector(s1.theta), theta_vector(s2.theta)
    )
    ok = same and differs and bitwise
    return (0.0 if ok else 1.0), 0.5, "bitwise scenario and solver reproducibility"


# ---------------------------------------------------------------------------
# Suite runner.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tol: float
    detail: str = ""
    seconds: float = 0.0


CHECKS: Dict[str, Callable] = {
    "single_link_second_moment": check_single_link_second_moment,
    "effective_composition_scalar": check_effective_composition_scalar,
    "effective_second_moment": check_effective_second_moment,
    "receiver_covariance_mc": check_receiver_covariance_mc,
    "receiver_covariance_identity": check_receiver_covariance_identity,
    "expected_mse_mc": check_expected_mse_mc,
    "bound_below_sample_mean": check_bound_below_sample_mean,
    "rate_sandwich": check_rate_sandwich,
    "combiner_optimality": check_combiner_optimality,
    "weight_identity": check_weight_identity,
    "precoder_kkt": check_precoder_kkt,
    "power_curve": check_power_curve,
    "phase_surrogate_constancy": check_phase_surrogate_constancy,
    "phase_step_descent": check_phase_step_descent,
    "phase_grid_two_elements": check_phase_grid_two_elements,
    "sweep_monotone": check_sweep_monotone,
    "perfect_csi_reduction": check_perfect_csi_reduction,
    "scheme_grid_sanity": check_scheme_grid_sanity,
    "generator_determinism": check_generator_determinism,
}


def run_validation_suite(
    seed: int = 0,
    names: Optional[List[str]] = None,
    inject: Optional[Dict[str, dict]] = None,
) -> List[CheckResult]:
    """Run the oracle checks and return their measured errors.

    ``inject`` maps a check name to extra keyword arguments, which is how the
    tests substitute a deliberately broken implementation to confirm the
    oracle rejects it.
    """
    picked = list(CHECKS) if names is None else list(names)
    unknown = [n for n in picked if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}; available: {list(CHECKS)}")
    inject = inject or {}
    results = []
    order = {name: i for i, name in enumerate(CHECKS)}
    for name in picked:
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(order[name],))
        )
        start = time.perf_counter()
        error, tol, detail = CHECKS[name](rng, **inject.get(name, {}))
        results.append(
            CheckResult(
                name=name,
                passed=bool(error <= tol),
                error=float(error),
                tol=float(tol),
                detail=detail,
                seconds=time.perf_counter() - start,
            )
        )
    return results


def format_report(results: List[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{status}  {r.name:<{width}}  error={r.error:<12.4e} tol={r.tol:<10.1e}"
            f" {r.seconds:6.2f}s  {r.detail}"
        )
    n_fail = sum(not r.passed for r in results)
    lines.append(
        f"{len(results) - n_fail}/{len(results)} checks passed"
        + (f", {n_fail} FAILED" if n_fail else "")
    )
    return "\n".join(lines)
