"""System description for an IRS-aided full-duplex MIMO link pair.

One full-duplex base station (m0 transmit, n0 receive antennas) serves one
uplink user (mk antennas, uk streams) and one downlink user (nj antennas,
vj streams) with help from an intelligent reflecting surface of
irs_rows x irs_cols unit-modulus elements.

Eight channel links connect the nodes.  Each is known only through an
estimate plus a zero-mean Gaussian error with separable (Kronecker) row and
column covariances: the error of an m x r link has transmit-side covariance
j_cov (r x r) and receive-side covariance k_cov (m x m).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple, Union

import numpy as np

from .linalg import max_abs_offherm

# The eight links, in the order (direct, cross/self, surface-side):
#   h_k       uplink user -> BS receive          (n0 x mk)
#   h_j       BS transmit -> downlink user       (nj x m0)
#   h_0       BS transmit -> BS receive (self)   (n0 x m0)
#   h_jk      uplink user -> downlink user       (nj x mk)
#   h_theta0  BS transmit -> surface             (rc x m0)
#   h_0theta  surface -> BS receive              (n0 x rc)
#   h_jtheta  surface -> downlink user           (nj x rc)
#   h_thetak  uplink user -> surface             (rc x mk)
LINK_NAMES = ("h_k", "h_j", "h_0", "h_jk", "h_theta0", "h_0theta", "h_jtheta", "h_thetak")


@dataclass(frozen=True)
class SystemConfig:
    m0: int  # BS transmit antennas
    n0: int  # BS receive antennas
    mk: int  # uplink-user antennas
    nj: int  # downlink-user antennas
    uk: int  # uplink data streams
    vj: int  # downlink data streams
    irs_rows: int
    irs_cols: int
    alpha0: float  # BS transmit power budget (W)
    alphak: float  # uplink-user power budget (W)
    sigma0_sq: float  # receiver noise variance at the BS (W)
    sigmaj_sq: float  # receiver noise variance at the downlink user (W)
    wk: float = 1.0  # uplink rate weight
    wj: float = 1.0  # downlink rate weight

    @property
    def rc(self) -> int:
        return self.irs_rows * self.irs_cols


def link_shapes(cfg: SystemConfig) -> dict:
    rc = cfg.rc
    return {
        "h_k": (cfg.n0, cfg.mk),
        "h_j": (cfg.nj, cfg.m0),
        "h_0": (cfg.n0, cfg.m0),
        "h_jk": (cfg.nj, cfg.mk),
        "h_theta0": (rc, cfg.m0),
        "h_0theta": (cfg.n0, rc),
        "h_jtheta": (cfg.nj, rc),
        "h_thetak": (rc, cfg.mk),
    }


def validate_config(cfg: SystemConfig) -> list:
    """Return a list of violated-invariant messages; empty means valid."""
    errors = []
    for name in ("m0", "n0", "mk", "nj", "uk", "vj", "irs_rows", "irs_cols"):
        if int(getattr(cfg, name)) < 1:
            errors.append(f"{name} must be a positive integer")
    if cfg.uk > min(cfg.mk, cfg.n0):
        errors.append(f"uk={cfg.uk} exceeds min(mk, n0)={min(cfg.mk, cfg.n0)}")
    if cfg.vj > min(cfg.m0, cfg.nj):
        errors.append(f"vj={cfg.vj} exceeds min(m0, nj)={min(cfg.m0, cfg.nj)}")
    for name in ("alpha0", "alphak", "sigma0_sq", "sigmaj_sq"):
        if not getattr(cfg, name) > 0.0:
            errors.append(f"{name} must be > 0")
    for name in ("wk", "wj"):
        if getattr(cfg, name) < 0.0:
            errors.append(f"{name} must be >= 0")
    return errors


def _check_links(obj, what: str) -> None:
    for name in LINK_NAMES:
        mat = getattr(obj, name)
        if mat.ndim != 2:
            raise ValueError(f"{what}.{name} must be a 2-D matrix")
    rc_rows = getattr(obj, "h_theta0").shape[0]
    n0 = getattr(obj, "h_k").shape[0]
    if getattr(obj, "h_0theta").shape != (n0, getattr(obj, "h_0theta").shape[1]):
        raise ValueError(f"{what}: inconsistent BS receive dimension")


@dataclass(frozen=True)
class ChannelEstimates:
    """Estimated channel matrices for the eight links."""

    h_k: np.ndarray
    h_j: np.ndarray
    h_0: np.ndarray
    h_jk: np.ndarray
    h_theta0: np.ndarray
    h_0theta: np.ndarray
    h_jtheta: np.ndarray
    h_thetak: np.ndarray

    def __post_init__(self):
        _check_links(self, "ChannelEstimates")


@dataclass(frozen=True)
class TrueChannels:
    """Realized channel matrices (estimate plus error draw) for the eight links."""

    h_k: np.ndarray
    h_j: np.ndarray
    h_0: np.ndarray
    h_jk: np.ndarray
    h_theta0: np.ndarray
    h_0theta: np.ndarray
    h_jtheta: np.ndarray
    h_thetak: np.ndarray

    def __post_init__(self):
        _check_links(self, "TrueChannels")


class CovPair(NamedTuple):
    """Kronecker factors of one link's error covariance.

    j_cov is the transmit-side (column) factor, k_cov the receive-side (row)
    factor; the error of an m x r link satisfies E[dH X dH^H] =
    Tr(X j_cov^T) k_cov for any r x r matrix X.
    """

    j_cov: np.ndarray
    k_cov: np.ndarray


@dataclass(frozen=True)
class ErrorCovariances:
    h_k: CovPair
    h_j: CovPair
    h_0: CovPair
    h_jk: CovPair
    h_theta0: CovPair
    h_0theta: CovPair
    h_jtheta: CovPair
    h_thetak: CovPair

    @classmethod
    def zeros(cls, cfg: SystemConfig) -> "ErrorCovariances":
        shapes = link_shapes(cfg)
        pairs = {}
        for name, (rows, cols) in shapes.items():
            pairs[name] = CovPair(
                np.zeros((cols, cols), dtype=complex), np.zeros((rows, rows), dtype=complex)
            )
        return cls(**pairs)

    @classmethod
    def iid(cls, cfg: SystemConfig, sigma_sq: float) -> "ErrorCovariances":
        """Identity transmit factor, sigma_sq-scaled identity receive factor."""
        shapes = link_shapes(cfg)
        pairs = {}
        for name, (rows, cols) in shapes.items():
            pairs[name] = CovPair(
                np.eye(cols, dtype=complex), sigma_sq * np.eye(rows, dtype=complex)
            )
        return cls(**pairs)


def validate_covariances(err: ErrorCovariances, cfg: SystemConfig, tol: float = 1e-12) -> list:
    """Hermitian-PSD and dimension checks for all sixteen covariance factors."""
    problems = []
    shapes = link_shapes(cfg)
    for name in LINK_NAMES:
        pair = getattr(err, name)
        rows, cols = shapes[name]
        for side, mat, dim in (("j_cov", pair.j_cov, cols), ("k_cov", pair.k_cov, rows)):
            if mat.shape != (dim, dim):
                problems.append(f"{name}.{side} has shape {mat.shape}, expected {(dim, dim)}")
                continue
            if max_abs_offherm(mat) > tol * max(1.0, float(np.max(np.abs(mat)))):
                problems.append(f"{name}.{side} is not Hermitian")
                continue
            vals = np.linalg.eigvalsh(mat)
            if vals.size and float(vals[0]) < -tol:
                problems.append(f"{name}.{side} has eigenvalue {vals[0]:.3e} < -{tol}")
    return problems


@dataclass(frozen=True)
class IrsPhase:
    """Unit-modulus reflection coefficients of the surface, as a flat vector."""

    theta: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.theta, dtype=complex)
        if vec.ndim != 1:
            raise ValueError("theta must be a 1-D vector")
        dev = np.max(np.abs(np.abs(vec) - 1.0)) if vec.size else 0.0
        if dev > 1e-12:
            raise ValueError(f"theta entries must be unit modulus (max deviation {dev:.3e})")
        object.__setattr__(self, "theta", vec)

    @classmethod
    def ones(cls, rc: int) -> "IrsPhase":
        return cls(np.ones(rc, dtype=complex))

    @classmethod
    def from_angles(cls, angles: np.ndarray) -> "IrsPhase":
        return cls(np.exp(1j * np.asarray(angles, dtype=float)))


def theta_vector(theta: Union[IrsPhase, np.ndarray]) -> np.ndarray:
    if isinstance(theta, IrsPhase):
        return theta.theta
    return np.asarray(theta, dtype=complex)


@dataclass(frozen=True)
class EffectiveChannels:
    """Direct-plus-reflected compound channels for the four signal paths."""

    h_bar_k: np.ndarray  # uplink user -> BS receive
    h_bar_0: np.ndarray  # BS transmit -> BS receive (self-interference)
    h_bar_j: np.ndarray  # BS transmit -> downlink user
    h_bar_jk: np.ndarray  # uplink user -> downlink user


def compose_effective_channels(channels, theta) -> EffectiveChannels:
    """Combine direct and surface-reflected paths for every signal route.

    The reflection is applied as column/row scaling by the phase vector, so
    no dense diagonal matrix is ever formed.  Accepts ChannelEstimates or
    TrueChannels; the estimate version of the compound channel is obtained by
    passing estimates.
    """
    tv = theta_vector(theta)
    rc = tv.shape[0]
    for name in ("h_theta0", "h_thetak"):
        if getattr(channels, name).shape[0] != rc:
            raise ValueError(
                f"theta has {rc} entries but {name} has {getattr(channels, name).shape[0]} rows"
            )
    for name in ("h_0theta", "h_jtheta"):
        if getattr(channels, name).shape[1] != rc:
            raise ValueError(
                f"theta has {rc} entries but {name} has {getattr(channels, name).shape[1]} columns"
            )
    out_scaled = channels.h_0theta * tv  # BS-receive side, columns scaled
    dl_scaled = channels.h_jtheta * tv  # downlink-user side
    return EffectiveChannels(
        h_bar_k=channels.h_k + out_scaled @ channels.h_thetak,
        h_bar_0=channels.h_0 + out_scaled @ channels.h_theta0,
        h_bar_j=channels.h_j + dl_scaled @ channels.h_theta0,
        h_bar_jk=channels.h_jk + dl_scaled @ channels.h_thetak,
    )


@dataclass(frozen=True)
class BeamformingState:
    """One complete design point of the alternating optimization."""

    u_k: np.ndarray  # uplink precoder, mk x uk
    v_j: np.ndarray  # downlink precoder, m0 x vj
    f_k: np.ndarray  # uplink combiner at the BS, uk x n0
    f_j: np.ndarray  # downlink combiner at the user, vj x nj
    w_k: np.ndarray  # uplink MSE weight, uk x uk
    w_j: np.ndarray  # downlink MSE weight, vj x vj
    theta: IrsPhase
    lambda_k: float = 0.0  # uplink power multiplier
    lambda_0: float = 0.0  # downlink power multiplier


def validate_state(state: BeamformingState, cfg: SystemConfig, tol: float = 1e-6) -> list:
    problems = []
    expected = {
        "u_k": (cfg.mk, cfg.uk),
        "v_j": (cfg.m0, cfg.vj),
        "f_k": (cfg.uk, cfg.n0),
        "f_j": (cfg.vj, cfg.nj),
        "w_k": (cfg.uk, cfg.uk),
        "w_j": (cfg.vj, cfg.vj),
    }
    for name, shape in expected.items():
        if getattr(state, name).shape != shape:
            problems.append(f"{name} has shape {getattr(state, name).shape}, expected {shape}")
    if state.theta.theta.shape[0] != cfg.rc:
        problems.append(f"theta has {state.theta.theta.shape[0]} entries, expected {cfg.rc}")
    for name in ("w_k", "w_j"):
        mat = getattr(state, name)
        if mat.size and max_abs_offherm(mat) > tol * max(1.0, float(np.max(np.abs(mat)))):
            problems.append(f"{name} is not Hermitian")
    for name, lam in (("lambda_k", state.lambda_k), ("lambda_0", state.lambda_0)):
        if lam < 0.0:
            problems.append(f"{name} must be >= 0")
    p_ul = float(np.sum(np.abs(state.u_k) ** 2))
    p_dl = float(np.sum(np.abs(state.v_j) ** 2))
    if p_ul > cfg.alphak * (1.0 + tol):
        problems.append(f"uplink power {p_ul:.6e} exceeds budget {cfg.alphak:.6e}")
    if p_dl > cfg.alpha0 * (1.0 + tol):
        problems.append(f"downlink power {p_dl:.6e} exceeds budget {cfg.alpha0:.6e}")
    return problems


def replace_links(container, **overrides):
    """Copy a channel/covariance container with some links replaced."""
    kind = type(container)
    values = {f.name: getattr(container, f.name) for f in fields(container)}
    values.update(overrides)
    return kind(**values)
