"""Benchmark schemes: duplexing x surface x robustness grid.

Every scheme runs the same alternating solver on a transformed problem,
refreshes its combiners at the final precoders and phases under its own
design-time error model, and is then scored by Monte Carlo through those
designed receivers under the physical error statistics:

* non-robust ("Non-RB"): designed with all error covariances zeroed, i.e.
  the estimates are trusted as exact; evaluation keeps the real errors.
* no surface ("No-IRS"): the four surface links are removed from both design
  and evaluation, and the phase update is skipped.
* half duplex ("HD"): the self-interference and inter-user links vanish; the
  uplink and downlink are designed as two independent slots, each with its
  own surface phases, and the reported rate is half the slot-rate sum.

Scoring through the designed receivers (rather than re-deriving ideal MMSE
receivers per draw) is what makes the robustness comparison meaningful: a
genie receiver would repair most of what a design that trusted bad estimates
got wrong.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .ewmmse import SolverOptions, run_alternating_solver, update_combiners
from .rate import RateReport, ergodic_wsr_lb, monte_carlo_wsr_fixed_rx
from .system_model import (
    LINK_NAMES,
    BeamformingState,
    ChannelEstimates,
    CovPair,
    ErrorCovariances,
    SystemConfig,
    replace_links,
)

IRS_LINKS = ("h_theta0", "h_0theta", "h_jtheta", "h_thetak")
FD_ONLY_LINKS = ("h_0", "h_jk")


@dataclass(frozen=True)
class SchemeId:
    duplex: str  # "fd" | "hd"
    irs: str  # "with_irs" | "no_irs"
    robust: str  # "robust" | "non_robust"

    @property
    def label(self) -> str:
        parts = [
            "FD" if self.duplex == "fd" else "HD",
            "IRS" if self.irs == "with_irs" else "No-IRS",
            "RB" if self.robust == "robust" else "Non-RB",
        ]
        return "-".join(parts)

    def __post_init__(self):
        if self.duplex not in ("fd", "hd"):
            raise ValueError(f"bad duplex {self.duplex!r}")
        if self.irs not in ("with_irs", "no_irs"):
            raise ValueError(f"bad irs {self.irs!r}")
        if self.robust not in ("robust", "non_robust"):
            raise ValueError(f"bad robust {self.robust!r}")


ALL_SCHEMES = tuple(
    SchemeId(duplex=d, irs=i, robust=r)
    for d in ("fd", "hd")
    for i in ("with_irs", "no_irs")
    for r in ("robust", "non_robust")
)
PROPOSED = SchemeId(duplex="fd", irs="with_irs", robust="robust")
_BY_LABEL = {s.label: s for s in ALL_SCHEMES}


def parse_scheme(label: str) -> SchemeId:
    try:
        return _BY_LABEL[label.strip()]
    except KeyError:
        raise ValueError(
            f"unknown scheme {label!r}; expected one of {sorted(_BY_LABEL)}"
        ) from None


def _zero_cov_like(pair: CovPair) -> CovPair:
    return CovPair(np.zeros_like(pair.j_cov), np.zeros_like(pair.k_cov))


def _drop_links(est: ChannelEstimates, err: ErrorCovariances, names) -> Tuple[
    ChannelEstimates, ErrorCovariances
]:
    est_over = {n: np.zeros_like(getattr(est, n)) for n in names}
    err_over = {n: _zero_cov_like(getattr(err, n)) for n in names}
    return replace_links(est, **est_over), replace_links(err, **err_over)


def _zero_all_covs(err: ErrorCovariances) -> ErrorCovariances:
    over = {n: _zero_cov_like(getattr(err, n)) for n in LINK_NAMES}
    return replace_links(err, **over)


@dataclass(frozen=True)
class SchemeResult:
    scheme: SchemeId
    states: Tuple[BeamformingState, ...]  # one state, or (uplink slot, downlink slot) for HD
    report: RateReport  # Monte-Carlo evaluation under the physical errors
    analytical: Optional[RateReport] = None  # ergodic lower bound of the design
    traces: Tuple[tuple, ...] = ()  # one solver trace per state, same order


def _refresh_combiners(
    est: ChannelEstimates,
    err_design: ErrorCovariances,
    state: BeamformingState,
    cfg: SystemConfig,
) -> BeamformingState:
    """Re-derive the combiners at the final precoders and phases.

    The sweep updates combiners first, so after the last sweep they lag the
    precoder and phase blocks by one update.  The refresh uses the scheme's
    own design-time error model: a non-robust design stays blind to the
    errors at its receiver too.
    """
    f_k, f_j = update_combiners(est, err_design, state.theta, state, cfg)
    return replace(state, f_k=f_k, f_j=f_j)


def solve_scheme(
    scheme: SchemeId,
    est: ChannelEstimates,
    err: ErrorCovariances,
    cfg: SystemConfig,
    opts: SolverOptions,
    rng: np.random.Generator,
    n_error_draws: int = 200,
    hd_shared_theta: bool = False,
    eval_rng: Optional[np.random.Generator] = None,
) -> SchemeResult:
    """Design one scheme on this scenario and evaluate it by Monte Carlo.

    The evaluation always uses the scheme's physical system (surface and
    duplex transformations applied to estimates and true error statistics)
    and runs through the scheme's designed receivers; only the non-robust
    design is blinded to the errors.  Half duplex optimizes the surface per
    slot by default; hd_shared_theta makes the downlink slot reuse the
    uplink slot's phases instead.  eval_rng, when given, feeds the
    evaluation draws from a separate stream so different schemes can be
    scored on identical channel realizations.
    """
    est_phys, err_phys = est, err
    if scheme.irs == "no_irs":
        est_phys, err_phys = _drop_links(est_phys, err_phys, IRS_LINKS)
    if scheme.duplex == "hd":
        est_phys, err_phys = _drop_links(est_phys, err_phys, FD_ONLY_LINKS)
    err_design = _zero_all_covs(err_phys) if scheme.robust == "non_robust" else err_phys
    opts_run = replace(opts, optimize_irs=(scheme.irs == "with_irs"))
    if eval_rng is None:
        eval_rng = rng

    if scheme.duplex == "fd":
        state, trace = run_alternating_solver(est_phys, err_design, cfg, opts_run, rng=rng)
        state = _refresh_combiners(est_phys, err_design, state, cfg)
        report = monte_carlo_wsr_fixed_rx(
            est_phys, err_phys, state, cfg, n_error_draws, eval_rng
        )
        analytical = ergodic_wsr_lb(est_phys, err_phys, state, cfg)
        return SchemeResult(
            scheme=scheme,
            states=(state,),
            report=report,
            analytical=analytical,
            traces=(tuple(trace),),
        )

    # Half duplex: one uplink-only and one downlink-only slot, each a full
    # design with its own surface phases, combined at half time share.
    cfg_ul = replace(cfg, wj=0.0)
    cfg_dl = replace(cfg, wk=0.0)
    state_ul, trace_ul = run_alternating_solver(
        est_phys, err_design, cfg_ul, opts_run, rng=rng
    )
    opts_dl = opts_run
    theta_dl = None
    if hd_shared_theta:
        opts_dl = replace(opts_run, optimize_irs=False)
        theta_dl = state_ul.theta
    state_dl, trace_dl = run_alternating_solver(
        est_phys, err_design, cfg_dl, opts_dl, rng=rng, theta_init=theta_dl
    )
    state_ul = _refresh_combiners(est_phys, err_design, state_ul, cfg_ul)
    state_dl = _refresh_combiners(est_phys, err_design, state_dl, cfg_dl)
    rep_ul = monte_carlo_wsr_fixed_rx(
        est_phys, err_phys, state_ul, cfg_ul, n_error_draws, eval_rng
    )
    rep_dl = monte_carlo_wsr_fixed_rx(
        est_phys, err_phys, state_dl, cfg_dl, n_error_draws, eval_rng
    )
    lb_ul = ergodic_wsr_lb(est_phys, err_phys, state_ul, cfg_ul)
    lb_dl = ergodic_wsr_lb(est_phys, err_phys, state_dl, cfg_dl)
    stderr = None
    if rep_ul.stderr is not None and rep_dl.stderr is not None:
        stderr = 0.5 * float(np.hypot(rep_ul.stderr, rep_dl.stderr))
    report = RateReport(
        wsr_total=0.5 * (rep_ul.wsr_total + rep_dl.wsr_total),
        r_ul=0.5 * rep_ul.r_ul,
        r_dl=0.5 * rep_dl.r_dl,
        kind="monte_carlo_fixed_rx",
        n_samples=n_error_draws,
        stderr=stderr,
    )
    analytical = RateReport(
        wsr_total=0.5 * (lb_ul.wsr_total + lb_dl.wsr_total),
        r_ul=0.5 * lb_ul.r_ul,
        r_dl=0.5 * lb_dl.r_dl,
        kind="analytic_lb",
    )
    return SchemeResult(
        scheme=scheme,
        states=(state_ul, state_dl),
        report=report,
        analytical=analytical,
        traces=(tuple(trace_ul), tuple(trace_dl)),
    )
