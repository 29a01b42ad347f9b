"""Closed-form second-order expectations under separable channel errors.

For a link H = H_hat + dH with E[dH X dH^H] = Tr(X j_cov^T) k_cov the two
basic identities are

    E[H X H^H] = H_hat X H_hat^H + Tr(X j_cov^T) k_cov
    E[H^H X H] = H_hat^H X H_hat + Tr(k_cov X) j_cov^T.

A compound (direct-plus-reflected) channel D + A diag(theta) B with
independent errors on D, A, B reduces to nested applications of the same
identities, because the expectation over the inner link can be taken first:

    E[(D + A T B) X (D + A T B)^H]
        = E[D X D^H] + D_hat X B_hat^H T^H A_hat^H + (h.c.)
          + E_A[A T E_B[B X B^H] T^H A^H]

with T = diag(theta), and the mirrored version for E[(.)^H M (.)].  All
trace factors are evaluated elementwise, so no Kronecker product or diagonal
matrix is ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .linalg import herm, trace_prod_t
from .system_model import (
    ChannelEstimates,
    ErrorCovariances,
    SystemConfig,
    theta_vector,
)

# A link is handled as the triple (estimate, transmit factor, receive factor).
Link = Tuple[np.ndarray, np.ndarray, np.ndarray]


def link_triple(est: ChannelEstimates, err: ErrorCovariances, name: str) -> Link:
    pair = getattr(err, name)
    return getattr(est, name), pair.j_cov, pair.k_cov


def expect_hxh(h_hat: np.ndarray, j_cov: np.ndarray, k_cov: np.ndarray, x: np.ndarray) -> np.ndarray:
    """E[H X H^H] for Hermitian X."""
    return h_hat @ x @ herm(h_hat) + trace_prod_t(x, j_cov) * k_cov


def expect_hhx(h_hat: np.ndarray, j_cov: np.ndarray, k_cov: np.ndarray, x: np.ndarray) -> np.ndarray:
    """E[H^H X H] for Hermitian X."""
    # Tr(k_cov X) = sum_{il} k_il x_li, computed without the product matrix.
    tr = float(np.sum(k_cov * x.T).real)
    return herm(h_hat) @ x @ h_hat + tr * j_cov.T


def _sandwich(theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """diag(theta) X diag(theta)^H via row/column scaling."""
    return (theta[:, None] * x) * theta.conj()[None, :]


def _sandwich_adj(theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """diag(theta)^H X diag(theta)."""
    return (theta.conj()[:, None] * x) * theta[None, :]


def expect_eff_hxh(d: Link, a: Link, b: Link, theta, x: np.ndarray) -> np.ndarray:
    """E[(D + A diag(theta) B) X (D + A diag(theta) B)^H]."""
    tv = theta_vector(theta)
    d_hat, d_j, d_k = d
    a_hat = a[0]
    b_hat = b[0]
    inner = expect_hxh(*b, x)  # E[B X B^H]
    out = expect_hxh(d_hat, d_j, d_k, x)
    out = out + expect_hxh(a[0], a[1], a[2], _sandwich(tv, inner))
    cross = d_hat @ x @ herm((a_hat * tv) @ b_hat)
    return out + cross + herm(cross)


def expect_eff_hhx(d: Link, a: Link, b: Link, theta, m: np.ndarray) -> np.ndarray:
    """E[(D + A diag(theta) B)^H M (D + A diag(theta) B)]."""
    tv = theta_vector(theta)
    d_hat = d[0]
    a_hat = a[0]
    b_hat = b[0]
    inner = expect_hhx(*a, m)  # E[A^H M A]
    out = expect_hhx(*d, m)
    out = out + expect_hhx(b[0], b[1], b[2], _sandwich_adj(tv, inner))
    cross = herm(d_hat) @ m @ ((a_hat * tv) @ b_hat)
    return out + cross + herm(cross)


def error_part_eff_hxh(d: Link, a: Link, b: Link, theta, x: np.ndarray) -> np.ndarray:
    """Error-only covariance of a compound channel's quadratic form.

    The four contributions are: the direct link's own error, the inner
    (towards-surface) error reflected through the estimated outer link, the
    estimated inner signal hitting the outer link's error, and the
    error-times-error floor.  All are invariant to a common phase rotation of
    theta.
    """
    tv = theta_vector(theta)
    _, d_j, d_k = d
    a_hat, a_j, a_k = a
    b_hat, b_j, b_k = b
    out = trace_prod_t(x, d_j) * d_k
    c_inner = trace_prod_t(x, b_j)  # Tr(X j_b^T)
    a_scaled = a_hat * tv
    out = out + c_inner * (a_scaled @ b_k @ herm(a_scaled))
    reflected = _sandwich(tv, b_hat @ x @ herm(b_hat) + c_inner * b_k)
    return out + trace_prod_t(reflected, a_j) * a_k


@dataclass(frozen=True)
class AuxExpectations:
    """Expected receive-side covariances of the four compound signal routes."""

    q_k: np.ndarray  # E[Hbar_k U U^H Hbar_k^H], n0 x n0
    t_j: np.ndarray  # E[Hbar_j V V^H Hbar_j^H], nj x nj
    t_0: np.ndarray  # E[Hbar_0 V V^H Hbar_0^H], n0 x n0 (self-interference)
    q_jk: np.ndarray  # E[Hbar_jk U U^H Hbar_jk^H], nj x nj (cross interference)


def build_aux(
    est: ChannelEstimates,
    err: ErrorCovariances,
    theta,
    u_cov: np.ndarray,
    v_cov: np.ndarray,
) -> AuxExpectations:
    """All four expected signal covariances for given precoder Gram matrices."""
    link = lambda name: link_triple(est, err, name)
    return AuxExpectations(
        q_k=expect_eff_hxh(link("h_k"), link("h_0theta"), link("h_thetak"), theta, u_cov),
        t_j=expect_eff_hxh(link("h_j"), link("h_jtheta"), link("h_theta0"), theta, v_cov),
        t_0=expect_eff_hxh(link("h_0"), link("h_0theta"), link("h_theta0"), theta, v_cov),
        q_jk=expect_eff_hxh(link("h_jk"), link("h_jtheta"), link("h_thetak"), theta, u_cov),
    )


@dataclass(frozen=True)
class SigmaPair:
    """Expected interference-plus-noise covariances at the two receivers."""

    sigma_ul: np.ndarray  # n0 x n0, at the BS
    sigma_dl: np.ndarray  # nj x nj, at the downlink user


def build_sigma(
    est: ChannelEstimates,
    err: ErrorCovariances,
    theta,
    u_cov: np.ndarray,
    v_cov: np.ndarray,
    cfg: SystemConfig,
) -> SigmaPair:
    """Everything the receivers see apart from the estimated useful signal.

    Per receiver: the own signal's error-induced covariance, the full
    expected covariance of the interfering route (self-interference at the
    BS, cross interference at the downlink user), and the noise floor.
    Algebraically this equals the build_aux combination
    q + t + noise - (estimated effective channel) GramU (.)^H; the test suite
    asserts that consistency.
    """
    link = lambda name: link_triple(est, err, name)
    sigma_ul = (
        error_part_eff_hxh(link("h_k"), link("h_0theta"), link("h_thetak"), theta, u_cov)
        + expect_eff_hxh(link("h_0"), link("h_0theta"), link("h_theta0"), theta, v_cov)
        + cfg.sigma0_sq * np.eye(cfg.n0, dtype=complex)
    )
    sigma_dl = (
        error_part_eff_hxh(link("h_j"), link("h_jtheta"), link("h_theta0"), theta, v_cov)
        + expect_eff_hxh(link("h_jk"), link("h_jtheta"), link("h_thetak"), theta, u_cov)
        + cfg.sigmaj_sq * np.eye(cfg.nj, dtype=complex)
    )
    return SigmaPair(sigma_ul=sigma_ul, sigma_dl=sigma_dl)
