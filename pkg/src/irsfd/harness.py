"""Experiment driver: flat-file specs, deterministic sweeps, tabular output.

A sweep walks one parameter (CSI-error scale rho, or transmit SNR in dB)
across a set of schemes and Monte-Carlo scenarios.  Every (point, scheme,
scenario) cell is an independent task seeded from the master seed and the
cell's indices, so results are byte-identical for any worker count, and the
scenario substream depends only on the scenario index so all schemes and
sweep points see the same channel draws (paired comparisons).

Outputs per run: results.csv (fixed versioned header), results.json
(validated against the shipped schema), trace/*.jsonl (per-sweep solver
records, one file per point and scheme), and sweep.svg.
"""

from __future__ import annotations

import json
import hashlib
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import ALL_SCHEMES, PROPOSED, parse_scheme, solve_scheme
from .channel_gen import CsiErrorPolicy, GeometryConfig, error_covariances, generate_estimates
from .ewmmse import SolverOptions
from .irs_mm import MmOptions
from .system_model import SystemConfig, validate_config
from .validation import format_report, run_validation_suite  # noqa: F401  (CLI surface)

RESULTS_SCHEMA_VERSION = "irsfd.results.v1"
CSV_HEADER = (
    "sweep,param_value,scheme,mean_wsr_bits,stderr_bits,n_scenarios,"
    "analytic_lb_mean_bits,analytic_lb_stderr_bits"
)


@dataclass(frozen=True)
class ExperimentSpec:
    """Flat, file-serializable description of one experiment.

    Defaults are the desk-scale benchmark: large enough that every mechanism
    (surface, self-interference, robustness) is active, small enough that a
    full sweep finishes in minutes.  The propagation constants here are
    normalized so direct links sit near unit gain, which keeps received
    signal, interference, and CSI-error magnitudes on comparable scales
    across the swept range; physical textbook constants remain the defaults
    of GeometryConfig for library use.  The steep surface exponent keeps the
    reflected path a perturbation of the direct one, so scheme comparisons
    measure robustness rather than which phase basin a solver landed in.
    """

    # Antennas, surface elements, streams.
    m0: int = 8
    n0: int = 4
    mk: int = 3
    nj: int = 3
    uk: int = 3
    vj: int = 3
    irs_rows: int = 4
    irs_cols: int = 4
    # Noise floors (watts) and rate weights.  Powers come from the SNR.
    sigma0_sq: float = 1e-11
    sigmaj_sq: float = 1e-11
    wk: float = 1.0
    wj: float = 1.0
    # Geometry and large-scale propagation.
    bs_pos: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    irs_pos: Tuple[float, float, float] = (20.0, 10.0, 0.0)
    ul_center: Tuple[float, float, float] = (20.0, 0.0, 30.0)
    dl_center: Tuple[float, float, float] = (30.0, 0.0, 20.0)
    user_radius: float = 8.0
    rician_k_direct: float = 1.0
    rician_k_si: float = 1.0
    pathloss_ref_db: float = 16.5
    pathloss_exp_direct: float = 1.0
    pathloss_exp_irs: float = 3.0
    # CSI-error decay against operating SNR.
    alpha_decay: float = 1.0
    # Solver controls.
    outer_tol: float = 1e-4
    max_outer_iters: int = 200
    inner_tol: float = 1e-6
    max_inner_iters: int = 100
    init_policy: str = "svd_estimate"
    hd_shared_theta: bool = False
    # Sweep definition.
    sweep: str = "rho"  # "rho" (fixed snr_db) or "snr" (fixed rho)
    snr_db: float = 30.0
    rho: float = 0.4
    rho_list: Tuple[float, ...] = (0.001, 0.01, 0.1, 0.4, 1.0)
    snr_db_list: Tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    schemes: Tuple[str, ...] = tuple(s.label for s in ALL_SCHEMES)
    # Sampling sizes and bookkeeping.
    n_scenarios: int = 50
    n_error_draws: int = 200
    master_seed: int = 1
    out_dir: str = "results"


def desk_spec() -> ExperimentSpec:
    return ExperimentSpec()


def paper_spec() -> ExperimentSpec:
    """Figure-scale sizes; hours, not minutes, for a full sweep."""
    return replace(
        desk_spec(), m0=15, n0=8, mk=5, nj=5, uk=2, vj=2,
        irs_rows=10, irs_cols=10, alpha_decay=0.6, n_error_draws=500,
    )


PRESETS = {"desk": desk_spec, "paper": paper_spec}


# ---------------------------------------------------------------------------
# Flat key = value serialization.
# ---------------------------------------------------------------------------

_INT_KEYS = {
    "m0", "n0", "mk", "nj", "uk", "vj", "irs_rows", "irs_cols",
    "max_outer_iters", "max_inner_iters", "n_scenarios", "n_error_draws",
    "master_seed",
}
_FLOAT_KEYS = {
    "sigma0_sq", "sigmaj_sq", "wk", "wj", "user_radius", "rician_k_direct",
    "rician_k_si", "pathloss_ref_db", "pathloss_exp_direct", "pathloss_exp_irs",
    "alpha_decay", "outer_tol", "inner_tol", "snr_db", "rho",
}
_STR_KEYS = {"init_policy", "sweep", "out_dir"}
_BOOL_KEYS = {"hd_shared_theta"}
_VEC3_KEYS = {"bs_pos", "irs_pos", "ul_center", "dl_center"}
_FLOAT_LIST_KEYS = {"rho_list", "snr_db_list"}
_STR_LIST_KEYS = {"schemes"}

_ALL_KEYS = tuple(f.name for f in fields(ExperimentSpec))


def _parse_value(key: str, raw: str):
    raw = raw.strip().strip('"')
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _STR_KEYS:
            return raw
        if key in _BOOL_KEYS:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"expected a boolean, got {raw!r}")
        if key in _VEC3_KEYS:
            parts = tuple(float(p) for p in raw.split(","))
            if len(parts) != 3:
                raise ValueError(f"expected 3 coordinates, got {len(parts)}")
            return parts
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(p) for p in raw.split(",") if p.strip())
        if key in _STR_LIST_KEYS:
            return tuple(p.strip() for p in raw.split(",") if p.strip())
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: cannot parse {raw!r} ({exc})") from None
    raise ValueError(f"unknown config key {key!r}; known keys: {', '.join(_ALL_KEYS)}")


def _format_value(key: str, value) -> str:
    if key in _BOOL_KEYS:
        return "true" if value else "false"
    if key in _VEC3_KEYS or key in _FLOAT_LIST_KEYS:
        return ", ".join(repr(float(v)) for v in value)
    if key in _STR_LIST_KEYS:
        return ", ".join(value)
    if key in _FLOAT_KEYS:
        return repr(float(value))
    return str(value)


def spec_to_text(spec: ExperimentSpec) -> str:
    lines = [f"{key} = {_format_value(key, getattr(spec, key))}" for key in _ALL_KEYS]
    return "\n".join(lines) + "\n"


def apply_overrides(spec: ExperimentSpec, pairs: Sequence[str]) -> ExperimentSpec:
    """Apply "key=value" strings on top of a spec; later pairs win."""
    updates = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"override {pair!r} is not of the form key=value")
        key, raw = pair.split("=", 1)
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ValueError(
                f"unknown config key {key!r}; known keys: {', '.join(_ALL_KEYS)}"
            )
        updates[key] = _parse_value(key, raw)
    return replace(spec, **updates)


def spec_from_text(text: str, base: Optional[ExperimentSpec] = None) -> ExperimentSpec:
    spec = base if base is not None else desk_spec()
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith(";"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key = value, got {line!r}")
        pairs.append(stripped)
    return apply_overrides(spec, pairs)


def spec_sha256(spec: ExperimentSpec) -> str:
    return hashlib.sha256(spec_to_text(spec).encode()).hexdigest()


def spec_to_dict(spec: ExperimentSpec) -> dict:
    out = {}
    for key in _ALL_KEYS:
        value = getattr(spec, key)
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def validate_spec(spec: ExperimentSpec) -> List[str]:
    problems = []
    if spec.sweep not in ("rho", "snr"):
        problems.append(f"sweep must be 'rho' or 'snr', got {spec.sweep!r}")
    if spec.sweep == "rho" and not spec.rho_list:
        problems.append("rho_list is empty")
    if spec.sweep == "snr" and not spec.snr_db_list:
        problems.append("snr_db_list is empty")
    if not spec.schemes:
        problems.append("schemes is empty")
    for label in spec.schemes:
        try:
            parse_scheme(label)
        except ValueError as exc:
            problems.append(str(exc))
    if spec.n_scenarios < 1:
        problems.append("n_scenarios must be >= 1")
    if spec.n_error_draws < 1:
        problems.append("n_error_draws must be >= 1")
    if any(r < 0 for r in spec.rho_list) or spec.rho < 0:
        problems.append("rho values must be >= 0")
    if spec.init_policy not in ("svd_estimate", "scaled_identity", "random"):
        problems.append(f"unknown init_policy {spec.init_policy!r}")
    points = sweep_points(spec) if not problems else []
    for value, snr_db in points[:1]:
        del value
        problems.extend(validate_config(system_at(spec, snr_db)))
    return problems


# ---------------------------------------------------------------------------
# Derived per-point configuration.
# ---------------------------------------------------------------------------


def system_at(spec: ExperimentSpec, snr_db: float) -> SystemConfig:
    """Powers follow the transmit-SNR definition alpha/noise = snr."""
    snr = 10.0 ** (snr_db / 10.0)
    return SystemConfig(
        m0=spec.m0, n0=spec.n0, mk=spec.mk, nj=spec.nj, uk=spec.uk, vj=spec.vj,
        irs_rows=spec.irs_rows, irs_cols=spec.irs_cols,
        alpha0=snr * spec.sigmaj_sq, alphak=snr * spec.sigma0_sq,
        sigma0_sq=spec.sigma0_sq, sigmaj_sq=spec.sigmaj_sq,
        wk=spec.wk, wj=spec.wj,
    )


def geometry(spec: ExperimentSpec) -> GeometryConfig:
    return GeometryConfig(
        bs_pos=spec.bs_pos, irs_pos=spec.irs_pos,
        ul_center=spec.ul_center, dl_center=spec.dl_center,
        user_radius=spec.user_radius,
        rician_k_direct=spec.rician_k_direct, rician_k_si=spec.rician_k_si,
        pathloss_ref_db=spec.pathloss_ref_db,
        pathloss_exp_direct=spec.pathloss_exp_direct,
        pathloss_exp_irs=spec.pathloss_exp_irs,
        seed=spec.master_seed,
    )


def solver_options(spec: ExperimentSpec) -> SolverOptions:
    return SolverOptions(
        outer_tol=spec.outer_tol,
        max_outer_iters=spec.max_outer_iters,
        mm=MmOptions(inner_tol=spec.inner_tol, max_inner_iters=spec.max_inner_iters),
        init_policy=spec.init_policy,
    )


def sweep_points(spec: ExperimentSpec) -> List[Tuple[float, float]]:
    """(rho, snr_db) pairs in sweep order."""
    if spec.sweep == "rho":
        return [(rho, spec.snr_db) for rho in spec.rho_list]
    return [(spec.rho, snr_db) for snr_db in spec.snr_db_list]


def point_value(spec: ExperimentSpec, point: Tuple[float, float]) -> float:
    return point[0] if spec.sweep == "rho" else point[1]


# ---------------------------------------------------------------------------
# Sweep execution.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    param_value: float
    mean_wsr_bits: float
    stderr_bits: float
    n_scenarios: int
    analytic_lb_mean_bits: Optional[float] = None
    analytic_lb_stderr_bits: Optional[float] = None


@dataclass(frozen=True)
class SweepResult:
    spec: ExperimentSpec
    sweep: str
    rows: Tuple[SweepRow, ...]


def scenario_rng(master_seed: int, scenario: int) -> np.random.Generator:
    """Scenario substream: shared by every scheme and sweep point."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(0, scenario))
    )


def cell_rng(
    master_seed: int, point: int, scheme_key: int, scenario: int
) -> np.random.Generator:
    """Design substream: unique per (point, scheme, scenario) cell."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(1, point, scheme_key, scenario))
    )


def eval_rng(master_seed: int, point: int, scenario: int) -> np.random.Generator:
    """Evaluation substream: shared by every scheme at one (point, scenario).

    Schemes that share error statistics then see identical channel draws,
    which pairs their Monte-Carlo scores and cancels draw noise out of
    scheme-to-scheme differences.
    """
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(2, point, scenario))
    )


def _run_cell(task):
    """One (sweep point, scheme, scenario): design, evaluate, trace."""
    spec, point_idx, rho, snr_db, label, scenario = task
    scheme = parse_scheme(label)
    cfg = system_at(spec, snr_db)
    geo = geometry(spec)
    opts = solver_options(spec)
    est = generate_estimates(cfg, geo, scenario_rng(spec.master_seed, scenario))
    policy = CsiErrorPolicy(rho=rho, alpha_decay=spec.alpha_decay)
    err = error_covariances(policy, 10.0 ** (snr_db / 10.0), cfg)
    rng = cell_rng(
        spec.master_seed, point_idx, ALL_SCHEMES.index(scheme), scenario
    )
    result = solve_scheme(
        scheme, est, err, cfg, opts, rng,
        n_error_draws=spec.n_error_draws, hd_shared_theta=spec.hd_shared_theta,
        eval_rng=eval_rng(spec.master_seed, point_idx, scenario),
    )
    traces = tuple(
        tuple(
            (t.iteration, t.wsr_lb, t.power_ul, t.power_dl, t.lambda_k, t.lambda_0)
            for t in slot
        )
        for slot in result.traces
    )
    return (
        point_idx,
        label,
        scenario,
        result.report.wsr_total,
        result.analytical.wsr_total if result.analytical is not None else None,
        traces,
    )


def run_experiment(
    spec: ExperimentSpec,
    threads: int = 1,
    out_dir: Optional[str] = None,
    write_outputs: bool = True,
) -> SweepResult:
    """Run the sweep and persist results; deterministic for any thread count."""
    problems = validate_spec(spec)
    if problems:
        raise ValueError("invalid experiment spec: " + "; ".join(problems))
    points = sweep_points(spec)
    tasks = [
        (spec, pi, rho, snr_db, label, scenario)
        for pi, (rho, snr_db) in enumerate(points)
        for label in spec.schemes
        for scenario in range(spec.n_scenarios)
    ]
    if threads > 1:
        chunk = max(1, len(tasks) // (threads * 8))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            payloads = list(pool.map(_run_cell, tasks, chunksize=chunk))
    else:
        payloads = [_run_cell(task) for task in tasks]

    by_cell: Dict[Tuple[int, str, int], tuple] = {
        (pi, label, scenario): (mc, lb, traces)
        for pi, label, scenario, mc, lb, traces in payloads
    }
    rows = []
    trace_blobs: Dict[Tuple[int, str], List[str]] = {}
    for pi, point in enumerate(points):
        value = point_value(spec, point)
        for label in spec.schemes:
            mcs = np.array(
                [by_cell[(pi, label, s)][0] for s in range(spec.n_scenarios)]
            )
            mean = float(np.mean(mcs))
            stderr = (
                float(np.std(mcs, ddof=1) / np.sqrt(spec.n_scenarios))
                if spec.n_scenarios > 1
                else 0.0
            )
            lb_mean = lb_stderr = None
            if label == PROPOSED.label:
                lbs = np.array(
                    [by_cell[(pi, label, s)][1] for s in range(spec.n_scenarios)]
                )
                lb_mean = float(np.mean(lbs))
                lb_stderr = (
                    float(np.std(lbs, ddof=1) / np.sqrt(spec.n_scenarios))
                    if spec.n_scenarios > 1
                    else 0.0
                )
            rows.append(
                SweepRow(
                    scheme=label,
                    param_value=value,
                    mean_wsr_bits=mean,
                    stderr_bits=stderr,
                    n_scenarios=spec.n_scenarios,
                    analytic_lb_mean_bits=lb_mean,
                    analytic_lb_stderr_bits=lb_stderr,
                )
            )
            lines = []
            for scenario in range(spec.n_scenarios):
                for slot, recs in enumerate(by_cell[(pi, label, scenario)][2]):
                    for it, wsr, p_ul, p_dl, l_k, l_0 in recs:
                        lines.append(
                            json.dumps(
                                {
                                    "scenario": scenario,
                                    "slot": slot,
                                    "iteration": it,
                                    "wsr_lb": wsr,
                                    "power_ul": p_ul,
                                    "power_dl": p_dl,
                                    "lambda_k": l_k,
                                    "lambda_0": l_0,
                                },
                                sort_keys=True,
                            )
                        )
            trace_blobs[(pi, label)] = lines

    result = SweepResult(spec=spec, sweep=spec.sweep, rows=tuple(rows))
    if write_outputs:
        target = Path(out_dir if out_dir is not None else spec.out_dir)
        write_results(result, target, trace_blobs)
    return result


# ---------------------------------------------------------------------------
# Persistence.
# ---------------------------------------------------------------------------


def _csv_float(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".12g")


def results_csv_text(result: SweepResult) -> str:
    lines = [
        f"# schema={RESULTS_SCHEMA_VERSION}",
        f"# spec_sha256={spec_sha256(result.spec)}",
        CSV_HEADER,
    ]
    for row in result.rows:
        lines.append(
            ",".join(
                (
                    result.sweep,
                    format(row.param_value, ".12g"),
                    row.scheme,
                    _csv_float(row.mean_wsr_bits),
                    _csv_float(row.stderr_bits),
                    str(row.n_scenarios),
                    _csv_float(row.analytic_lb_mean_bits),
                    _csv_float(row.analytic_lb_stderr_bits),
                )
            )
        )
    return "\n".join(lines) + "\n"


def results_json_dict(result: SweepResult) -> dict:
    return {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "sweep": result.sweep,
        "spec": spec_to_dict(result.spec),
        "spec_sha256": spec_sha256(result.spec),
        "rows": [
            {
                "scheme": row.scheme,
                "param_value": row.param_value,
                "mean_wsr_bits": row.mean_wsr_bits,
                "stderr_bits": row.stderr_bits,
                "n_scenarios": row.n_scenarios,
                "analytic_lb_mean_bits": row.analytic_lb_mean_bits,
                "analytic_lb_stderr_bits": row.analytic_lb_stderr_bits,
            }
            for row in result.rows
        ],
    }


def load_results_schema() -> dict:
    schema_path = Path(__file__).parent / "schemas" / "results_v1.json"
    return json.loads(schema_path.read_text())


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def write_results(
    result: SweepResult,
    out_dir: Path,
    trace_blobs: Optional[Dict[Tuple[int, str], List[str]]] = None,
) -> None:
    import jsonschema

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    doc = results_json_dict(result)
    jsonschema.validate(doc, load_results_schema())
    _write_text(out_dir / "results.csv", results_csv_text(result))
    _write_text(out_dir / "results.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if trace_blobs:
        trace_dir = out_dir / "trace"
        try:
            trace_dir.mkdir(exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create trace directory {trace_dir}: {exc}") from exc
        points = sweep_points(result.spec)
        for (pi, label), lines in trace_blobs.items():
            value = point_value(result.spec, points[pi])
            name = f"{result.sweep}{format(value, 'g')}_{label}.jsonl"
            _write_text(trace_dir / name, "\n".join(lines) + ("\n" if lines else ""))
    emit_plots(result, out_dir / "sweep.svg")


# ---------------------------------------------------------------------------
# Plotting.
# ---------------------------------------------------------------------------


def emit_plots(result: SweepResult, out_path: Path) -> None:
    """One chart per sweep: mean WSR vs the swept parameter, 2-stderr bars."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "irsfd"
    if not result.rows:
        warnings.warn("no rows to plot; skipping chart")
        return
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    labels_in_order = list(dict.fromkeys(row.scheme for row in result.rows))
    single_point = len({row.param_value for row in result.rows}) == 1
    plotted = 0
    for label in labels_in_order:
        rows = [r for r in result.rows if r.scheme == label]
        xs = np.array([r.param_value for r in rows])
        ys = np.array([r.mean_wsr_bits for r in rows])
        es = 2.0 * np.array([r.stderr_bits for r in rows])
        keep = np.isfinite(ys)
        if not np.any(keep):
            warnings.warn(f"series {label!r} is empty; skipped")
            continue
        ax.errorbar(
            xs[keep], ys[keep], yerr=es[keep],
            marker="o", markersize=3.5, capsize=2.5, linewidth=1.2,
            linestyle="none" if single_point else "-", label=label,
        )
        plotted += 1
    analytic = [
        r for r in result.rows if r.analytic_lb_mean_bits is not None
    ]
    if analytic:
        xs = np.array([r.param_value for r in analytic])
        ys = np.array([r.analytic_lb_mean_bits for r in analytic])
        es = 2.0 * np.array([r.analytic_lb_stderr_bits or 0.0 for r in analytic])
        ax.errorbar(
            xs, ys, yerr=es, marker="s", markersize=3.5, capsize=2.5,
            linewidth=1.2, linestyle="none" if single_point else "--",
            color="black", label=f"{analytic[0].scheme} bound",
        )
        plotted += 1
    if plotted == 0:
        warnings.warn("all series empty; no chart written")
        plt.close(fig)
        return
    if result.sweep == "rho" and not single_point:
        ax.set_xscale("log")
        ax.set_xlabel("CSI error scale rho")
    else:
        ax.set_xlabel("transmit SNR (dB)" if result.sweep == "snr" else "CSI error scale rho")
    ax.set_ylabel("average WSR (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    try:
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"failed writing {out_path}: {exc}") from exc
    finally:
        plt.close(fig)


def load_results(out_dir: Path) -> SweepResult:
    """Rebuild a SweepResult from a previous run's results.json."""
    path = Path(out_dir) / "results.json"
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    spec_dict = doc["spec"]
    kwargs = {}
    for f in fields(ExperimentSpec):
        value = spec_dict[f.name]
        kwargs[f.name] = tuple(value) if isinstance(value, list) else value
    spec = ExperimentSpec(**kwargs)
    rows = tuple(
        SweepRow(
            scheme=r["scheme"],
            param_value=r["param_value"],
            mean_wsr_bits=r["mean_wsr_bits"],
            stderr_bits=r["stderr_bits"],
            n_scenarios=r["n_scenarios"],
            analytic_lb_mean_bits=r.get("analytic_lb_mean_bits"),
            analytic_lb_stderr_bits=r.get("analytic_lb_stderr_bits"),
        )
        for r in doc["rows"]
    )
    return SweepResult(spec=spec, sweep=doc["sweep"], rows=rows)
