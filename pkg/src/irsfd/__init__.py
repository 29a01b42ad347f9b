"""Robust joint active/passive beamforming for an IRS-aided full-duplex
MIMO link under imperfect CSI: analytic ergodic-rate lower bound, expected
weighted-MMSE alternating solver, majorization-minimization phase optimizer,
benchmark scheme grid, and a deterministic sweep harness."""

from .system_model import (
    LINK_NAMES,
    BeamformingState,
    ChannelEstimates,
    CovPair,
    EffectiveChannels,
    ErrorCovariances,
    IrsPhase,
    SystemConfig,
    TrueChannels,
    compose_effective_channels,
    link_shapes,
    theta_vector,
    validate_config,
    validate_covariances,
    validate_state,
)
from .channel_gen import (
    CsiErrorPolicy,
    ErrorSampler,
    GeometryConfig,
    csi_error_variance,
    error_covariances,
    generate_estimates,
    sample_true_channels,
)
from .kron_expectation import (
    AuxExpectations,
    SigmaPair,
    build_aux,
    build_sigma,
    expect_eff_hhx,
    expect_eff_hxh,
    expect_hhx,
    expect_hxh,
)
from .rate import RateReport, ergodic_wsr_lb, instantaneous_wsr, monte_carlo_wsr
from .ewmmse import (
    SolverOptions,
    SweepTrace,
    expected_mse,
    init_state,
    run_alternating_solver,
    solve_power_constrained,
    update_combiners,
    update_precoders,
    update_weights,
)
from .irs_mm import (
    MmOptions,
    MmProblem,
    build_mm_problem,
    build_stz,
    mm_objective,
    mm_step,
    run_mm_phase_opt,
)
from .baselines import ALL_SCHEMES, PROPOSED, SchemeId, SchemeResult, parse_scheme, solve_scheme
from .harness import (
    ExperimentSpec,
    PRESETS,
    SweepResult,
    SweepRow,
    desk_spec,
    emit_plots,
    paper_spec,
    run_experiment,
    spec_from_text,
    spec_to_text,
)
from .validation import CheckResult, format_report, run_validation_suite

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
