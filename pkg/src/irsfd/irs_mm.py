"""Surface-phase optimization by majorization-minimization.

For fixed precoders, combiners and MSE weights, the expected weighted MSE is,
up to a phase-independent constant, a quadratic in the reflection vector:

    f(theta) = theta^H Sigma theta + 2 Re(s^T theta),
    Sigma = Z (Hadamard) T^T,   s = diag(S),

where Z collects the receive-side (surface -> receiver) quadratic factors, T
the transmit-side (towards-surface) expected signal covariances, and S the
cross terms between direct and reflected paths minus the desired-signal
retransmission terms.  Z and T are Hermitian PSD, so Sigma is PSD by the
Schur product theorem and lambda_max(Sigma) I - Sigma majorizes the
quadratic; each step then reduces to a phase projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .kron_expectation import expect_hhx, expect_hxh, link_triple
from .linalg import herm, hermitize
from .system_model import (
    BeamformingState,
    ChannelEstimates,
    ErrorCovariances,
    IrsPhase,
    SystemConfig,
    theta_vector,
)


@dataclass(frozen=True)
class MmOptions:
    inner_tol: float = 1e-6  # relative objective change that stops the sweep
    max_inner_iters: int = 100


@dataclass(frozen=True)
class MmProblem:
    """Quadratic surrogate data for one phase-optimization subproblem."""

    big_sigma: np.ndarray  # rc x rc Hermitian PSD quadratic form
    s_vec: np.ndarray  # rc linear coefficients
    lambda_max: float  # largest eigenvalue of big_sigma
    const: float = 0.0  # phase-independent offset, reporting only


def build_stz(
    est: ChannelEstimates,
    err: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Assemble the (S, T, Z) matrices of the phase-dependent expected MSE.

    T sums the expected towards-surface signal covariances of both users'
    transmissions; Z sums the expected surface-to-receiver quadratic factors
    weighted by both receivers' combiner-weight products; S holds the
    direct/reflected cross terms of the interference quadratics minus the
    desired-signal cross terms.
    """
    link = lambda name: link_triple(est, err, name)
    u_cov = state.u_k @ herm(state.u_k)
    v_cov = state.v_j @ herm(state.v_j)
    m_ul = herm(state.f_k) @ state.w_k @ state.f_k  # n0 x n0
    m_dl = herm(state.f_j) @ state.w_j @ state.f_j  # nj x nj

    t_mat = expect_hxh(*link("h_thetak"), u_cov) + expect_hxh(*link("h_theta0"), v_cov)
    z_mat = expect_hhx(*link("h_0theta"), m_ul) + expect_hhx(*link("h_jtheta"), m_dl)

    s_mat = (
        est.h_thetak @ u_cov @ herm(est.h_k) @ m_ul @ est.h_0theta
        + est.h_theta0 @ v_cov @ herm(est.h_0) @ m_ul @ est.h_0theta
        + est.h_theta0 @ v_cov @ herm(est.h_j) @ m_dl @ est.h_jtheta
        + est.h_thetak @ u_cov @ herm(est.h_jk) @ m_dl @ est.h_jtheta
        - est.h_thetak @ state.u_k @ state.w_k @ state.f_k @ est.h_0theta
        - est.h_theta0 @ state.v_j @ state.w_j @ state.f_j @ est.h_jtheta
    )
    return s_mat, hermitize(t_mat), hermitize(z_mat)


def build_mm_problem(
    s_mat: np.ndarray, t_mat: np.ndarray, z_mat: np.ndarray, const: float = 0.0
) -> MmProblem:
    """Collapse (S, T, Z) into the Hadamard quadratic and its majorizer level."""
    big_sigma = hermitize(z_mat * t_mat.T)
    lambda_max = float(np.linalg.eigvalsh(big_sigma)[-1]) if big_sigma.size else 0.0
    return MmProblem(
        big_sigma=big_sigma, s_vec=np.diag(s_mat).copy(), lambda_max=lambda_max, const=const
    )


def mm_objective(prob: MmProblem, theta) -> float:
    """theta^H Sigma theta + 2 Re(s^T theta) + const."""
    tv = theta_vector(theta)
    quad = float(np.real(tv.conj() @ prob.big_sigma @ tv))
    lin = 2.0 * float(np.real(prob.s_vec @ tv))
    return quad + lin + prob.const


def mm_step(prob: MmProblem, theta) -> np.ndarray:
    """One majorize-then-project step.

    q = (lambda_max I - Sigma) theta - conj(s); the minimizer of the
    majorizer on the unit torus is the entrywise phase of q.  Entries with
    q = 0 leave the surrogate flat, so the previous phase is kept there.
    """
    tv = theta_vector(theta)
    q = prob.lambda_max * tv - prob.big_sigma @ tv - prob.s_vec.conj()
    mag = np.abs(q)
    out = np.where(mag > 0.0, q / np.where(mag > 0.0, mag, 1.0), tv)
    return out


def run_mm_phase_opt(prob: MmProblem, theta_init, opts: MmOptions = MmOptions()) -> IrsPhase:
    """Iterate mm_step until the relative objective change falls below tol.

    Descent is guaranteed, so the objective sequence is non-increasing and
    the loop always terminates within max_inner_iters.
    """
    tv = theta_vector(theta_init).copy()
    obj = mm_objective(prob, tv)
    for _ in range(opts.max_inner_iters):
        tv = mm_step(prob, tv)
        new_obj = mm_objective(prob, tv)
        denom = max(abs(new_obj), 1e-300)
        if abs(obj - new_obj) <= opts.inner_tol * denom:
            obj = new_obj
            break
        obj = new_obj
    return IrsPhase(tv)
