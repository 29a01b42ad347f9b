"""Scenario generation: geometry-driven channel estimates and CSI-error models.

A scenario places the BS, the surface, and one user drawn uniformly inside
each user disk, then draws small-scale fading per link:

* direct, self-interference and inter-user links: Rician, LOS part from
  uniform-linear-array steering phases at the link's geometric angle,
* all surface-involved links: Rayleigh (iid complex Gaussian).

The fading matrix has unit average entry power and is then multiplied by the
square root of the link's distance-dependent power gain.

CSI errors follow the separable covariance model of system_model: the
default policy is an identity transmit factor and sigma_csi^2 * I receive
factor with sigma_csi^2 = rho / snr^alpha_decay, i.e. estimation quality
improves with operating SNR.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .linalg import psd_sqrt, rand_cn
from .system_model import (
    LINK_NAMES,
    ChannelEstimates,
    CovPair,
    ErrorCovariances,
    SystemConfig,
    TrueChannels,
    link_shapes,
)

# Minimum distance used in the path-loss law. The BS self-interference link
# has zero geometric length and is pinned to this reference distance.
MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class GeometryConfig:
    """Node placement and large-scale propagation constants.

    Positions are 3-D coordinates in metres. Users are drawn uniformly in a
    horizontal disk of user_radius around their center. The default
    large-scale constants follow common measurement-based values; the
    shipped experiment presets override them with normalized constants (see
    harness presets) so rates and CSI-error variances live on comparable
    scales.
    """

    bs_pos: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    irs_pos: Tuple[float, float, float] = (20.0, 10.0, 0.0)
    ul_center: Tuple[float, float, float] = (20.0, 0.0, 30.0)
    dl_center: Tuple[float, float, float] = (30.0, 0.0, 20.0)
    user_radius: float = 8.0
    rician_k_direct: float = 1.0  # Rician factor of the BS<->user and inter-user links
    rician_k_si: float = 1.0  # Rician factor of the self-interference link
    pathloss_ref_db: float = -30.0  # gain at the 1 m reference distance
    pathloss_exp_direct: float = 3.5
    pathloss_exp_irs: float = 2.2
    seed: int = 0


@dataclass(frozen=True)
class CsiErrorPolicy:
    """How CSI-error covariances are derived for a given operating point."""

    rho: float  # dimensionless error scale
    alpha_decay: float = 0.6  # SNR exponent of the error-variance decay
    structure: str = "iid_identity"  # or "custom"
    custom: Optional[ErrorCovariances] = None


def link_gain_db(geo: GeometryConfig, distance_m: float, irs_link: bool) -> float:
    """Large-scale power gain of one link in dB.

    gain = pathloss_ref_db - 10 * exponent * log10(d / 1 m), with d clamped
    below at the 1 m reference so the zero-length self-interference link gets
    the reference gain.
    """
    exponent = geo.pathloss_exp_irs if irs_link else geo.pathloss_exp_direct
    d = max(float(distance_m), MIN_DISTANCE_M)
    return geo.pathloss_ref_db - 10.0 * exponent * np.log10(d)


def amplitude_scale(geo: GeometryConfig, distance_m: float, irs_link: bool) -> float:
    """sqrt of the linear power gain, applied entrywise to the fading matrix."""
    return float(10.0 ** (link_gain_db(geo, distance_m, irs_link) / 20.0))


def ula_steering(n: int, direction_cos: float) -> np.ndarray:
    """Half-wavelength ULA response with unit-modulus entries."""
    return np.exp(1j * np.pi * np.arange(n) * direction_cos)


def _direction_cos(src: np.ndarray, dst: np.ndarray) -> float:
    """Cosine between the link direction and the shared array axis (x)."""
    diff = dst - src
    norm = float(np.linalg.norm(diff))
    if norm < 1e-12:
        return 0.0  # zero-length link: broadside response
    return float(diff[0] / norm)


def _rician(
    rng: np.random.Generator, rows: int, cols: int, k_factor: float, src, dst
) -> np.ndarray:
    """Unit-entry-power Rician fading with a steering-product LOS component."""
    cos = _direction_cos(np.asarray(src, float), np.asarray(dst, float))
    a_rx = ula_steering(rows, -cos)
    a_tx = ula_steering(cols, cos)
    los = np.outer(a_rx, a_tx)  # unit-modulus entries
    nlos = rand_cn(rng, rows, cols)
    return np.sqrt(k_factor / (1.0 + k_factor)) * los + np.sqrt(1.0 / (1.0 + k_factor)) * nlos


def _draw_in_disk(rng: np.random.Generator, center, radius: float) -> np.ndarray:
    """Uniform point in the horizontal disk around center (z kept fixed)."""
    r = radius * np.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * np.pi)
    c = np.asarray(center, dtype=float)
    return c + np.array([r * np.cos(phi), r * np.sin(phi), 0.0])


def generate_estimates(
    cfg: SystemConfig, geo: GeometryConfig, rng: Optional[np.random.Generator] = None
) -> ChannelEstimates:
    """Draw one scenario's channel estimates.

    Draw order is fixed (user positions, then links in LINK_NAMES order) so a
    given generator state reproduces the scenario bitwise.
    """
    if rng is None:
        rng = np.random.default_rng(geo.seed)
    bs = np.asarray(geo.bs_pos, float)
    irs = np.asarray(geo.irs_pos, float)
    ul_user = _draw_in_disk(rng, geo.ul_center, geo.user_radius)
    dl_user = _draw_in_disk(rng, geo.dl_center, geo.user_radius)
    shapes = link_shapes(cfg)

    def direct(name, src, dst, k_factor):
        rows, cols = shapes[name]
        fading = _rician(rng, rows, cols, k_factor, src, dst)
        return fading * amplitude_scale(geo, np.linalg.norm(dst - src), irs_link=False)

    def rayleigh(name, src, dst):
        rows, cols = shapes[name]
        fading = rand_cn(rng, rows, cols)
        return fading * amplitude_scale(geo, np.linalg.norm(dst - src), irs_link=True)

    return ChannelEstimates(
        h_k=direct("h_k", ul_user, bs, geo.rician_k_direct),
        h_j=direct("h_j", bs, dl_user, geo.rician_k_direct),
        h_0=direct("h_0", bs, bs, geo.rician_k_si),
        h_jk=direct("h_jk", ul_user, dl_user, geo.rician_k_direct),
        h_theta0=rayleigh("h_theta0", bs, irs),
        h_0theta=rayleigh("h_0theta", irs, bs),
        h_jtheta=rayleigh("h_jtheta", irs, dl_user),
        h_thetak=rayleigh("h_thetak", ul_user, irs),
    )


def csi_error_variance(policy: CsiErrorPolicy, snr_linear: float) -> float:
    """Per-entry error variance rho / snr^alpha_decay."""
    if snr_linear <= 0.0:
        raise ValueError("snr_linear must be > 0")
    return policy.rho / snr_linear**policy.alpha_decay


def error_covariances(
    policy: CsiErrorPolicy, snr_linear: float, cfg: SystemConfig
) -> ErrorCovariances:
    """Materialize the sixteen covariance factors for one operating point."""
    if policy.structure == "custom":
        if policy.custom is None:
            raise ValueError("structure='custom' requires the custom covariances")
        return policy.custom
    if policy.structure != "iid_identity":
        raise ValueError(f"unknown error-covariance structure {policy.structure!r}")
    if policy.rho == 0.0:
        return ErrorCovariances.zeros(cfg)
    return ErrorCovariances.iid(cfg, csi_error_variance(policy, snr_linear))


def sample_error(
    j_cov: np.ndarray, k_cov: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """One error-matrix draw: k_cov^{1/2} G (j_cov^T)^{1/2}, G iid CN(0,1).

    This realizes E[dH X dH^H] = Tr(X j_cov^T) k_cov and
    E[dH^H X dH] = Tr(k_cov X) j_cov^T.
    """
    rows = k_cov.shape[0]
    cols = j_cov.shape[0]
    g = rand_cn(rng, rows, cols)
    return psd_sqrt(k_cov) @ g @ psd_sqrt(j_cov.T)


class ErrorSampler:
    """Joint error-draw machinery with the matrix square roots precomputed.

    Repeated sampling (Monte-Carlo rate estimates, covariance oracles) only
    pays for the Gaussian draws and two small matmuls per link.
    """

    def __init__(self, est: ChannelEstimates, err: ErrorCovariances):
        self.est = est
        self.factors = {}
        for name in LINK_NAMES:
            pair: CovPair = getattr(err, name)
            if pair.j_cov.any() or pair.k_cov.any():
                self.factors[name] = (psd_sqrt(pair.k_cov), psd_sqrt(pair.j_cov.T))

    def draw(self, rng: np.random.Generator) -> TrueChannels:
        values = {}
        for name in LINK_NAMES:
            base = getattr(self.est, name)
            if name in self.factors:
                k_sqrt, jt_sqrt = self.factors[name]
                g = rand_cn(rng, base.shape[0], base.shape[1])
                values[name] = base + k_sqrt @ g @ jt_sqrt
            else:
                values[name] = base.copy()
        return TrueChannels(**values)


def sample_true_channels(
    est: ChannelEstimates, err: ErrorCovariances, rng: np.random.Generator
) -> TrueChannels:
    """Estimate plus one joint error draw over all eight links."""
    return ErrorSampler(est, err).draw(rng)
