from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from irsfd.baselines import ALL_SCHEMES, parse_scheme, solve_scheme
from irsfd.channel_gen import CsiErrorPolicy, error_covariances, generate_estimates
from irsfd.ewmmse import run_alternating_solver
from irsfd.harness import (
    cell_rng,
    desk_spec,
    eval_rng,
    geometry,
    scenario_rng,
    solver_options,
    system_at,
)

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SNR_GRID_DB = (0.0, 10.0, 20.0, 30.0)
RHO_HEAVY = 0.4
RHO_CURVE = (0.01, 0.1, 0.4, 1.0)
RHO_VANISHING = (0.1, 0.01, 0.001)
ROBUST = "FD-IRS-RB"
NAIVE = "FD-IRS-Non-RB"
HALF_DUPLEX = "HD-IRS-RB"
NO_SURFACE = "FD-No-IRS-RB"
N_RHO_SCENARIOS = 6
TOP_SNR_POINT = len(SNR_GRID_DB) - 1


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_instance(rng):
    """One random (cfg, est, err, state) tuple at oracle-check scale."""
    from irsfd.validation import random_instance

    return random_instance(rng)


@dataclass
class Cell:
    """Per-scenario results of one scheme at one sweep point."""

    wsr: np.ndarray
    stderr: np.ndarray
    lb: np.ndarray
    budget_checks: List[Tuple[float, float, float, float, float, float]]


def run_scheme_cell(spec, point_idx, rho, snr_db, label, n_scenarios) -> Cell:
    """Solve and score one scheme over the scenario batch of one sweep point.

    Uses the same RNG plumbing as the CLI harness: scenario seeds fix the
    estimates, the design stream is scheme-specific, and the evaluation
    stream is shared by every scheme at a (point, scenario) pair so scheme
    comparisons are paired.
    """
    scheme = parse_scheme(label)
    cfg = system_at(spec, snr_db)
    geo = geometry(spec)
    opts = solver_options(spec)
    err = error_covariances(
        CsiErrorPolicy(rho=rho, alpha_decay=spec.alpha_decay), 10.0 ** (snr_db / 10.0), cfg
    )
    wsr = np.empty(n_scenarios)
    sem = np.empty(n_scenarios)
    lb = np.empty(n_scenarios)
    checks = []
    for scen in range(n_scenarios):
        est = generate_estimates(cfg, geo, scenario_rng(spec.master_seed, scen))
        res = solve_scheme(
            scheme, est, err, cfg, opts,
            cell_rng(spec.master_seed, point_idx, ALL_SCHEMES.index(scheme), scen),
            n_error_draws=spec.n_error_draws,
            eval_rng=eval_rng(spec.master_seed, point_idx, scen),
        )
        wsr[scen] = res.report.wsr_total
        sem[scen] = res.report.stderr
        lb[scen] = res.analytical.wsr_total
        for state in res.states:
            checks.append(
                (
                    float(np.sum(np.abs(state.u_k) ** 2)),
                    cfg.alphak,
                    state.lambda_k,
                    float(np.sum(np.abs(state.v_j) ** 2)),
                    cfg.alpha0,
                    state.lambda_0,
                )
            )
    return Cell(wsr=wsr, stderr=sem, lb=lb, budget_checks=checks)


@pytest.fixture(scope="session")
def snr_grid() -> Dict[Tuple[float, str], Cell]:
    """Robust and naive full duplex over the SNR grid at heavy CSI error,
    plus robust half duplex at the top point."""
    spec = desk_spec()
    cells = {}
    for idx, snr_db in enumerate(SNR_GRID_DB):
        for label in (ROBUST, NAIVE):
            cells[(snr_db, label)] = run_scheme_cell(
                spec, idx, RHO_HEAVY, snr_db, label, spec.n_scenarios
            )
    cells[(30.0, HALF_DUPLEX)] = run_scheme_cell(
        spec, len(SNR_GRID_DB), RHO_HEAVY, 30.0, HALF_DUPLEX, spec.n_scenarios
    )
    return cells


@pytest.fixture(scope="session")
def rho_curve() -> Dict[float, Cell]:
    """Robust full duplex across the error-scale sweep at SNR 30 dB."""
    spec = desk_spec()
    return {
        rho: run_scheme_cell(spec, 100 + idx, rho, spec.snr_db, ROBUST, N_RHO_SCENARIOS)
        for idx, rho in enumerate(RHO_CURVE)
    }


@pytest.fixture(scope="session")
def rho_trend() -> Dict[Tuple[float, str], Cell]:
    """Robust and naive full duplex at vanishing error scales, SNR 30 dB.

    Together with the heavy-error top point of snr_grid this spans the
    decreasing sequence used by the gap-closure trend check."""
    spec = desk_spec()
    cells = {}
    for idx, rho in enumerate(RHO_VANISHING):
        for label in (ROBUST, NAIVE):
            cells[(rho, label)] = run_scheme_cell(
                spec, 200 + idx, rho, spec.snr_db, label, spec.n_scenarios
            )
    return cells


@pytest.fixture(scope="session")
def no_surface_cell() -> Cell:
    """Robust full duplex without the reflecting surface at the heavy-error
    top point, paired draw-for-draw with snr_grid's 30 dB cells."""
    spec = desk_spec()
    return run_scheme_cell(
        spec, TOP_SNR_POINT, RHO_HEAVY, 30.0, NO_SURFACE, spec.n_scenarios
    )


@pytest.fixture(scope="session")
def solver_batch():
    """Alternating-solver traces on 100 random desk-scale instances."""
    spec = desk_spec()
    cfg = system_at(spec, spec.snr_db)
    geo = geometry(spec)
    opts = solver_options(spec)
    err = error_covariances(
        CsiErrorPolicy(rho=RHO_HEAVY, alpha_decay=spec.alpha_decay),
        10.0 ** (spec.snr_db / 10.0),
        cfg,
    )
    out = []
    for scen in range(100):
        est = generate_estimates(cfg, geo, scenario_rng(spec.master_seed, 1000 + scen))
        state, trace = run_alternating_solver(est, err, cfg, opts)
        out.append((state, trace, cfg, opts))
    return out
