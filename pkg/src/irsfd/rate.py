"""Weighted sum-rate evaluation: analytic ergodic lower bound and Monte Carlo.

The analytic bound treats the estimated compound channels as the signal and
the full expected interference-plus-noise covariance (channel-error terms
included) as the impairment.  Two Monte-Carlo estimators sit above it:

* ``monte_carlo_wsr`` re-derives ideal MMSE receivers from each realized
  channel, so it scores the transmit design against a genie receiver that
  knows every draw exactly.
* ``monte_carlo_wsr_fixed_rx`` keeps the designed combiners and decodes
  coherently against the estimated compound channels, so the per-draw
  deviation of the desired link acts as extra noise.  This is the rate a
  receiver that only knows the estimates actually delivers, and the analytic
  bound lower-bounds its average.

All rates are in bits/s/Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .channel_gen import ErrorSampler
from .kron_expectation import build_sigma
from .linalg import herm, logdet_pd
from .system_model import (
    BeamformingState,
    ChannelEstimates,
    ErrorCovariances,
    SystemConfig,
    TrueChannels,
    compose_effective_channels,
)

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class RateReport:
    """One rate evaluation.

    kind is 'analytic_lb', 'instantaneous', 'monte_carlo' or
    'monte_carlo_fixed_rx'.
    """

    wsr_total: float
    r_ul: float
    r_dl: float
    kind: str
    n_samples: Optional[int] = None
    stderr: Optional[float] = None


def _link_rate_bits(h_eff: np.ndarray, precoder: np.ndarray, noise_cov: np.ndarray) -> float:
    """log2 det(I + P^H H^H C^{-1} H P) with C the interference-plus-noise cov.

    Goes through the Cholesky factor of C so an indefinite covariance raises
    instead of silently producing a wrong rate.
    """
    chol = np.linalg.cholesky(noise_cov)
    whitened = scipy.linalg.solve_triangular(
        chol, h_eff @ precoder, lower=True, check_finite=False
    )
    gram = np.eye(precoder.shape[1], dtype=complex) + herm(whitened) @ whitened
    return logdet_pd(gram) / LN2


def _row_space_rate_bits(
    combiner: np.ndarray,
    h_sig: np.ndarray,
    precoder: np.ndarray,
    noise_cov: np.ndarray,
) -> float:
    """Rate through a fixed linear receive front end, in bits.

    Only the row space of the combiner matters: any invertible mixing of its
    outputs is undone downstream.  Projecting onto an orthonormal basis of
    that space (pivoted QR of the conjugate transpose) keeps the projected
    noise covariance positive definite even for an ill-conditioned combiner;
    a zero combiner passes nothing and earns zero rate.
    """
    q, r, _ = scipy.linalg.qr(herm(combiner), mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0.0
    rank = int(np.sum(diag > max(combiner.shape) * np.finfo(float).eps * diag[0]))
    basis = q[:, :rank]
    sig = herm(basis) @ h_sig @ precoder
    cov = herm(basis) @ noise_cov @ basis
    sol = np.linalg.solve(0.5 * (cov + herm(cov)), sig)
    gram = np.eye(precoder.shape[1], dtype=complex) + herm(sig) @ sol
    return logdet_pd(0.5 * (gram + herm(gram))) / LN2


def instantaneous_wsr(
    true_ch: TrueChannels, state: BeamformingState, cfg: SystemConfig
) -> RateReport:
    """Weighted sum rate of one channel realization with MMSE receivers."""
    eff = compose_effective_channels(true_ch, state.theta)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    cov_ul = eff.h_bar_0 @ v_cov @ herm(eff.h_bar_0) + cfg.sigma0_sq * np.eye(cfg.n0)
    cov_dl = eff.h_bar_jk @ u_cov @ herm(eff.h_bar_jk) + cfg.sigmaj_sq * np.eye(cfg.nj)
    r_ul = cfg.wk * _link_rate_bits(eff.h_bar_k, state.u_k, cov_ul)
    r_dl = cfg.wj * _link_rate_bits(eff.h_bar_j, state.v_j, cov_dl)
    return RateReport(wsr_total=r_ul + r_dl, r_ul=r_ul, r_dl=r_dl, kind="instantaneous")


def ergodic_wsr_lb(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
) -> RateReport:
    """Analytic lower bound on the ergodic weighted sum rate."""
    eff = compose_effective_channels(est, state.theta)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    sigma = build_sigma(est, err, state.theta, u_cov, v_cov, cfg)
    r_ul = cfg.wk * _link_rate_bits(eff.h_bar_k, state.u_k, sigma.sigma_ul)
    r_dl = cfg.wj * _link_rate_bits(eff.h_bar_j, state.v_j, sigma.sigma_dl)
    return RateReport(wsr_total=r_ul + r_dl, r_ul=r_ul, r_dl=r_dl, kind="analytic_lb")


def monte_carlo_wsr(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
    n_samples: int,
    rng: np.random.Generator,
) -> RateReport:
    """Sample mean of the instantaneous weighted sum rate over error draws.

    Draws are taken sequentially from the passed generator, so the result is
    a pure function of (inputs, generator state).  stderr is the standard
    error of the reported mean.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sampler = ErrorSampler(est, err)
    totals = np.empty(n_samples)
    uls = np.empty(n_samples)
    dls = np.empty(n_samples)
    for i in range(n_samples):
        report = instantaneous_wsr(sampler.draw(rng), state, cfg)
        totals[i] = report.wsr_total
        uls[i] = report.r_ul
        dls[i] = report.r_dl
    stderr = float(np.std(totals, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return RateReport(
        wsr_total=float(np.mean(totals)),
        r_ul=float(np.mean(uls)),
        r_dl=float(np.mean(dls)),
        kind="monte_carlo",
        n_samples=n_samples,
        stderr=stderr,
    )


def monte_carlo_wsr_fixed_rx(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
    n_samples: int,
    rng: np.random.Generator,
) -> RateReport:
    """Sample mean of the weighted sum rate through the designed receivers.

    Transmit precoders, surface phases and combiners all stay fixed at the
    given state; each draw only changes the realized channels.  The decoder
    treats the estimated compound channel as the signal map, so on top of the
    realized cross interference and thermal noise, the desired link's own
    deviation from its estimate enters the per-draw noise covariance.  Draws
    are taken sequentially from the passed generator.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    eff_est = compose_effective_channels(est, state.theta)
    u, v = state.u_k, state.v_j
    u_cov = u @ herm(u)
    v_cov = v @ herm(v)
    eye_ul = cfg.sigma0_sq * np.eye(cfg.n0)
    eye_dl = cfg.sigmaj_sq * np.eye(cfg.nj)
    sampler = ErrorSampler(est, err)
    totals = np.empty(n_samples)
    uls = np.empty(n_samples)
    dls = np.empty(n_samples)
    for i in range(n_samples):
        eff = compose_effective_channels(sampler.draw(rng), state.theta)
        cov_ul = eff.h_bar_0 @ v_cov @ herm(eff.h_bar_0) + eye_ul
        cov_dl = eff.h_bar_jk @ u_cov @ herm(eff.h_bar_jk) + eye_dl
        dev_ul = (eff.h_bar_k - eff_est.h_bar_k) @ u
        dev_dl = (eff.h_bar_j - eff_est.h_bar_j) @ v
        uls[i] = cfg.wk * _row_space_rate_bits(
            state.f_k, eff_est.h_bar_k, u, cov_ul + dev_ul @ herm(dev_ul)
        )
        dls[i] = cfg.wj * _row_space_rate_bits(
            state.f_j, eff_est.h_bar_j, v, cov_dl + dev_dl @ herm(dev_dl)
        )
        totals[i] = uls[i] + dls[i]
    stderr = float(np.std(totals, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return RateReport(
        wsr_total=float(np.mean(totals)),
        r_ul=float(np.mean(uls)),
        r_dl=float(np.mean(dls)),
        kind="monte_carlo_fixed_rx",
        n_samples=n_samples,
        stderr=stderr,
    )
