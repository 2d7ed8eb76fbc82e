"""Command-line entry point.

Usage::

    epicluster <command> [--config run.json] [flags]

Commands: ``analyze``, ``simulate``, ``compare``, ``ode``, ``paradox``,
``yule``. Settings come from built-in defaults, then the JSON config file
(keys are the long flag names with ``_`` for ``-``), then flags. Every run
writes ``manifest.json`` (tool version, command, resolved config, seed and
the list of files) into ``--out``; JSON outputs also embed it under
``"manifest"``. Outputs depend only on the config, so re-runs are
byte-identical. Table schemas are fixed; see :mod:`epicluster.serialize`.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 statistical
verdict failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, malthus, model, paradox, serialize, stats
from .malthus import NotSupercriticalError, TruncationError
from .model import Parameters, Regime
from .rng import replicate_seed
from .sim import StopCondition, TraceSummary, replicate_batch, simulate, snapshot, totals_on_grid

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERDICT = 0, 1, 2, 3
COMMANDS = ("analyze", "simulate", "compare", "ode", "paradox", "yule")


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 2.0
    p: float = 0.5
    delta: float = 0.5
    seed: int = 0
    replicates: int = 1
    t_max: float | None = None
    max_individuals: int | None = None
    max_clusters: int | None = None
    out: str = "out"
    format: str = "csv"
    trunc_k: int | None = None
    tol: float = 1e-12
    workers: int = 1
    n_grid: int = 101
    band: float = 0.05
    tv_max: float = 0.02
    require_alpha: bool = False
    detection_free: bool = False
    lifespan: str = "exponential:1"
    intensity: str = "exponential"
    horizons: str = "12"

    def params(self) -> Parameters:
        return model.validate(self.gamma, self.p, self.delta, self.detection_free)

    def check(self) -> None:
        self.params()
        if self.replicates < 1:
            raise UsageError(f"replicates must be >= 1, got {self.replicates}")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")
        for name in ("tol", "band", "tv_max"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be > 0")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if self.n_grid < 2:
            raise UsageError("n_grid must be >= 2")
        if self.trunc_k is not None and self.trunc_k < 2:
            raise UsageError("trunc_k must be >= 2")
        if self.seed < 0:
            raise UsageError("seed must be >= 0")


# Per-command defaults layered over the RunConfig defaults.
COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "analyze": {},
    "simulate": {"t_max": 10.0, "max_individuals": 10_000},
    "compare": {"replicates": 20, "max_individuals": 10_000},
    "ode": {"t_max": 40.0, "trunc_k": 200},
    "paradox": {},
    "yule": {"delta": 0.0, "detection_free": True, "max_clusters": 100_000},
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    kind = _TYPES[name]
    try:
        if "bool" in kind:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if "int" in kind:
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if "float" in kind:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad value for {name}: {value!r}") from None


def resolve(command: str, config_file: str | None, overrides: dict[str, Any]) -> RunConfig:
    values: dict[str, Any] = dict(COMMAND_DEFAULTS[command])
    if config_file:
        try:
            loaded = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_file}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(_TYPES))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        values.update(loaded)
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    try:
        cfg.check()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


# ---------------------------------------------------------------------------
# Output helpers


class Output:
    """Writes files into one directory and records them for the manifest."""

    def __init__(self, command: str, cfg: RunConfig):
        self.command = command
        self.cfg = cfg
        self.dir = Path(cfg.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    @property
    def header(self) -> dict[str, Any]:
        cfg = asdict(self.cfg)
        del cfg["out"], cfg["workers"]
        return {
            "tool": "epicluster",
            "version": __version__,
            "command": self.command,
            "params": {"gamma": self.cfg.gamma, "p": self.cfg.p, "delta": self.cfg.delta},
            "seed": self.cfg.seed,
            "config": cfg,
        }

    def _path(self, name: str) -> Path:
        path = self.dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return path

    def json(self, name: str, payload: dict[str, Any]) -> None:
        serialize.write_json(self._path(name), {**payload, "manifest": self.header})

    def table(self, stem: str, columns: Sequence[str], rows) -> str:
        if self.cfg.format == "json":
            name = f"{stem}.json"
            records = [dict(zip(columns, serialize.plain(list(r)))) for r in rows]
            serialize.write_json(self._path(name), {"columns": list(columns), "rows": records})
        else:
            name = f"{stem}.csv"
            serialize.write_csv(self._path(name), columns, rows)
        return name

    def close(self, extra: dict[str, Any] | None = None) -> None:
        manifest = {**self.header, "files": sorted(self.files), **(extra or {})}
        serialize.write_json(self.dir / "manifest.json", manifest)


def _nullable(x: float) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(cfg: RunConfig) -> int:
    params = cfg.params()
    reg = model.regime(params)
    out = Output("analyze", cfg)
    spectral: dict[str, Any] = {
        "regime": reg.value,
        "extinction_probability": model.extinction_probability(params),
        "alpha": None,
        "beta": None,
        "c_a": None,
        "c_i": None,
    }
    if reg is not Regime.SUPERCRITICAL:
        if cfg.require_alpha:
            spectral["error"] = {
                "type": "NotSupercritical",
                "message": f"regime is {reg.value}; no positive growth rate exists",
            }
            out.json("spectral.json", spectral)
            out.close()
            return EXIT_NUMERICAL
        K = cfg.trunc_k or malthus.default_K(params)
        geo = malthus.geometric_pmf(params.rates.iso_success, K)
        rows = [(k, None, None, geo[k], None, None) for k in range(1, K + 1)]
    else:
        if params.degenerate:
            K = cfg.trunc_k or 1000
        else:
            K = cfg.trunc_k or malthus.default_K(params)
        sol = malthus.solve(params, cfg.tol, K)
        spectral.update(alpha=sol.alpha, beta=sol.beta, c_a=sol.c_a, c_i=_nullable(sol.c_i))
        ks = np.arange(1, K + 1)
        m_a = malthus.m_active(params, sol.alpha, ks)
        if params.degenerate:
            rows = [(k, sol.pi_a[k], None, None, m_a[k - 1], None) for k in ks]
        else:
            m_i = malthus.m_isolated(params, sol.alpha, ks)
            geo = malthus.geometric_pmf(params.rates.iso_success, K)
            rows = [
                (k, sol.pi_a[k], sol.pi_i[k], geo[k], m_a[k - 1], m_i[k - 1]) for k in ks
            ]
    spectral["trunc_k"] = K
    out.json("spectral.json", spectral)
    out.table("dist", ("k", "pi_a", "pi_i", "geometric_reference", "m_a", "m_i"), rows)
    out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _stop(cfg: RunConfig) -> StopCondition:
    return StopCondition(
        t_max=cfg.t_max, max_individuals=cfg.max_individuals, max_clusters=cfg.max_clusters
    )


def _simulate_one(job) -> dict[str, Any]:
    params, seed, stop, rep_dir, n_grid, fmt = job
    trace = simulate(params, seed, stop)
    rep_dir = Path(rep_dir)
    rep_dir.mkdir(parents=True, exist_ok=True)
    serialize.write_events(rep_dir / "events.jsonl", trace)
    grid = np.linspace(0.0, trace.end_time, n_grid)
    totals = totals_on_grid(trace, grid)
    if fmt == "json":
        for stem, cols, rows in (
            ("clusters", serialize.CLUSTER_COLUMNS, serialize.cluster_rows(trace)),
            ("snapshots", serialize.SNAPSHOT_COLUMNS, serialize.snapshot_rows(totals)),
        ):
            records = [dict(zip(cols, serialize.plain(list(r)))) for r in rows]
            serialize.write_json(rep_dir / f"{stem}.json", {"columns": list(cols), "rows": records})
    else:
        serialize.write_clusters(rep_dir / "clusters.csv", trace)
        serialize.write_snapshots(rep_dir / "snapshots.csv", totals)
    return {
        "seed": seed,
        "stop_reason": trace.stop_reason.name.lower(),
        "end_time": trace.end_time,
        "n_events": trace.n_events,
        "n_clusters": trace.n_clusters,
        "infected": trace.infected,
        "contagious": trace.contagious,
    }


def cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.params()
    stop = _stop(cfg)
    try:
        stop.check(params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Output("simulate", cfg)
    ext = "json" if cfg.format == "json" else "csv"
    jobs = []
    for i in range(cfg.replicates):
        rep = f"rep_{i:04d}"
        jobs.append((params, replicate_seed(cfg.seed, i), stop, str(out.dir / rep), cfg.n_grid, cfg.format))
        for name in ("events.jsonl", f"clusters.{ext}", f"snapshots.{ext}"):
            out.files.append(f"{rep}/{name}")
    if cfg.workers > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reps = list(pool.map(_simulate_one, jobs))
    else:
        reps = [_simulate_one(j) for j in jobs]
    out.close({"replicates": reps})
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare

ALPHA_GRID_STEP = 0.01


def _compare_reducer(trace) -> dict[str, Any]:
    if trace.contagious == 0:
        return {}
    snap = snapshot(trace, trace.end_time)
    grid = np.arange(0.0, trace.end_time, ALPHA_GRID_STEP)
    return {
        "active": np.bincount(snap.active_sizes)[1:] if snap.active_sizes.size else np.zeros(0, int),
        "isolated": np.bincount(snap.isolated_sizes)[1:] if snap.isolated_sizes.size else np.zeros(0, int),
        "a1": totals_on_grid(trace, grid).n_active_clusters,
    }


def pooled_alpha_hat(summaries: Sequence[TraceSummary]) -> float:
    """Slope of the pooled ``A^1`` on the common window of the surviving runs."""
    curves = [s.data["a1"] for s in summaries if s.survived]
    n = min(len(c) for c in curves)
    pooled = np.sum([c[:n] for c in curves], axis=0).astype(float)
    return stats.estimate_alpha((np.arange(n) * ALPHA_GRID_STEP, pooled))


def cmd_compare(cfg: RunConfig) -> int:
    params = cfg.params()
    if params.degenerate:
        raise UsageError("compare needs delta > 0 (no isolated clusters otherwise); use yule")
    stop = _stop(cfg)
    try:
        stop.check(params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summaries = replicate_batch(
        params, cfg.seed, cfg.replicates, stop, reducer=_compare_reducer, workers=cfg.workers
    )
    survivors = [s for s in summaries if s.survived]
    out = Output("compare", cfg)
    verdict: dict[str, Any] = {
        "n_replicates": len(summaries),
        "n_surviving": len(survivors),
    }
    if not survivors or model.regime(params) is not Regime.SUPERCRITICAL:
        verdict.update(inconclusive=True, passed=None, reason="no surviving replicate")
        out.json("verdict.json", verdict)
        out.close()
        return EXIT_OK

    emp_a = stats.pool([stats.EmpiricalDist(s.data["active"]) for s in survivors])
    emp_i = stats.pool([stats.EmpiricalDist(s.data["isolated"]) for s in survivors])
    sol = malthus.solve(params, cfg.tol, cfg.trunc_k)
    K = max(sol.pi_i.K, len(emp_i.counts), len(emp_a.counts))
    if cfg.trunc_k:
        K = cfg.trunc_k
    pi_a, _ = malthus.pi_active(params, sol.alpha, K)
    pi_i, _ = malthus.pi_isolated(params, sol.alpha, K)
    geo = malthus.geometric_pmf(params.rates.iso_success, K)
    rows = stats.distribution_table(emp_a, emp_i, pi_a, pi_i, geo, K)
    out.table(
        "comparison",
        ("k", "empirical_active", "empirical_isolated", "pi_a", "pi_i", "geometric_reference"),
        rows,
    )

    verdict.update(inconclusive=False, n_isolated_clusters=emp_i.total, n_active_clusters=emp_a.total)
    if emp_i.empty:
        verdict.update(inconclusive=True, passed=None, reason="no isolated cluster observed")
        out.json("verdict.json", verdict)
        out.close()
        return EXIT_OK
    tv_pi = stats.tv_distance(emp_i, pi_i)
    tv_geo = stats.tv_distance(emp_i, geo)
    verdict.update(
        tv_isolated_vs_pi_i=tv_pi,
        tv_isolated_vs_geometric=tv_geo,
        tv_active_vs_pi_a=stats.tv_distance(emp_a, pi_a),
    )
    for key, emp, law in (("chi2_pvalue_isolated", emp_i, pi_i), ("chi2_pvalue_active", emp_a, pi_a)):
        try:
            verdict[key] = stats.chi_square(emp, law).pvalue
        except stats.InsufficientDataError:
            verdict[key] = None
    try:
        alpha_hat = pooled_alpha_hat(survivors)
    except stats.InsufficientDataError:
        alpha_hat = None
    rel = None if alpha_hat is None else abs(alpha_hat - sol.alpha) / sol.alpha
    checks = {
        "tv_isolated_vs_pi_i_below_max": tv_pi < cfg.tv_max,
        "isolated_closer_to_pi_i_than_geometric": tv_pi < tv_geo,
        "alpha_hat_within_band": rel is not None and rel <= cfg.band,
    }
    verdict.update(
        alpha=sol.alpha,
        alpha_hat=alpha_hat,
        alpha_rel_error=rel,
        checks=checks,
        passed=all(checks.values()),
    )
    out.json("verdict.json", verdict)
    out.close()
    return EXIT_OK if verdict["passed"] else EXIT_VERDICT


# ---------------------------------------------------------------------------
# ode

ODE_AGREEMENT = 1e-4


def cmd_ode(cfg: RunConfig) -> int:
    params = cfg.params()
    K = cfg.trunc_k
    traj = malthus.integrate_nu(params, K, cfg.t_max)
    slope = malthus.log_slope(traj.times, traj.totals)
    out = Output("ode", cfg)
    totals = traj.totals
    out.table(
        "ode",
        ("t", "total_active", "log_total_active"),
        ((t, v, math.log(v)) for t, v in zip(traj.times, totals)),
    )
    report: dict[str, Any] = {
        "alpha_ode": slope,
        "leaked_fraction": traj.leaked_fraction,
        "trunc_k": K,
        "t_max": cfg.t_max,
        "alpha": None,
        "abs_difference": None,
        "agrees": None,
    }
    profile = traj.profile()
    pi_a = None
    if model.regime(params) is Regime.SUPERCRITICAL:
        alpha = malthus.solve_alpha(params, cfg.tol)
        pi_a, _ = malthus.pi_active(params, alpha, K)
        diff = abs(slope - alpha)
        report.update(
            alpha=alpha,
            abs_difference=diff,
            agrees=diff <= ODE_AGREEMENT,
            tv_profile_vs_pi_a=stats.tv_distance(profile, pi_a.normalized()),
        )
    out.table(
        "ode_profile",
        ("k", "nu_normalized", "pi_a"),
        ((k, profile[k], None if pi_a is None else pi_a[k]) for k in range(1, K + 1)),
    )
    out.json("ode.json", report)
    out.close()
    return EXIT_VERDICT if report["agrees"] is False else EXIT_OK


# ---------------------------------------------------------------------------
# paradox


def parse_lifespan(text: str) -> paradox.LifespanSpec:
    kind, _, arg = text.partition(":")
    try:
        if kind == "exponential":
            return paradox.LifespanSpec.exponential(float(arg or 1.0))
        if kind == "point":
            return paradox.LifespanSpec.point(float(arg))
        if kind == "table":
            data = json.loads(Path(arg).read_text(encoding="utf-8"))
            return paradox.LifespanSpec.tabulated(data["u_grid"], data["l_grid"])
    except (ValueError, KeyError, OSError) as exc:
        raise UsageError(f"bad lifespan {text!r}: {exc}") from None
    raise UsageError(f"unknown lifespan {text!r} (exponential:RATE, point:L or table:FILE)")


def parse_intensity(text: str) -> paradox.Intensity:
    kind, _, arg = text.partition(":")
    try:
        if kind == "exponential":
            return paradox.EXPONENTIAL
        if kind == "polynomial":
            return paradox.Intensity("polynomial", float(arg or 1.0))
    except ValueError as exc:
        raise UsageError(f"bad intensity {text!r}: {exc}") from None
    raise UsageError(f"unknown intensity {text!r} (exponential or polynomial:R)")


def cmd_paradox(cfg: RunConfig) -> int:
    spec = parse_lifespan(cfg.lifespan)
    intensity = parse_intensity(cfg.intensity)
    try:
        horizons = [float(h) for h in cfg.horizons.split(",")]
    except ValueError:
        raise UsageError(f"bad horizons {cfg.horizons!r}") from None
    if cfg.t_max is not None:
        horizons = [cfg.t_max]
    try:
        rows = paradox.paradox_table(spec, intensity, horizons, cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Output("paradox", cfg)
    out.table("paradox", ("t", "n_dead", "dead_mean", "lambda1_expectation", "lambda_expectation"), rows)
    target_name = "lambda1_expectation" if intensity.kind == "exponential" else "lambda_expectation"
    t_last, _, last_mean, lam1, lam = rows[-1]
    target = lam1 if intensity.kind == "exponential" else lam
    rel = None if last_mean is None else abs(last_mean - target) / abs(target)
    report = {
        "target": target_name,
        "target_value": target,
        "horizon": t_last,
        "dead_mean": last_mean,
        "finite_horizon_expectation": paradox.expected_dead_mean(spec, intensity, t_last),
        "rel_error": rel,
        "tolerance": cfg.tv_max,
        "passed": rel is not None and rel <= cfg.tv_max,
    }
    out.json("paradox.json", report)
    out.close()
    return EXIT_OK if report["passed"] else EXIT_VERDICT


# ---------------------------------------------------------------------------
# yule


def cmd_yule(cfg: RunConfig) -> int:
    if cfg.delta != 0.0:
        raise UsageError("yule runs the detection-free process; delta must be 0")
    params = cfg.params()
    if params.p == 0.0:
        raise UsageError("yule needs p > 0")
    stop = _stop(cfg)
    try:
        stop.check(params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    trace = simulate(params, cfg.seed, stop)
    emp = stats.EmpiricalDist.from_sizes(trace.cl_size)
    K = cfg.trunc_k or len(emp.counts)
    sigma = malthus.yule_simon(params.p, K)
    w = emp.weights
    out = Output("yule", cfg)
    out.table(
        "yule",
        ("k", "empirical", "sigma_p"),
        ((k, float(w[k - 1]) if k <= len(w) else 0.0, sigma[k]) for k in range(1, K + 1)),
    )
    tv = stats.tv_distance(emp, malthus.yule_simon(params.p, max(K, len(w))))
    report = {
        "n_clusters": trace.n_clusters,
        "end_time": trace.end_time,
        "stop_reason": trace.stop_reason.name.lower(),
        "tv_empirical_vs_sigma_p": tv,
        "tv_max": cfg.tv_max,
        "passed": tv < cfg.tv_max,
    }
    out.json("yule.json", report)
    out.close()
    return EXIT_OK if report["passed"] else EXIT_VERDICT


HANDLERS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "ode": cmd_ode,
    "paradox": cmd_paradox,
    "yule": cmd_yule,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run settings")
    g.add_argument("--config", help="JSON file with settings; flags override it")
    g.add_argument("--gamma", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--replicates", type=int)
    g.add_argument("--t-max", type=float)
    g.add_argument("--max-individuals", type=int)
    g.add_argument("--max-clusters", type=int)
    g.add_argument("--out", help="output directory")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--trunc-k", type=int, help="truncation size K")
    g.add_argument("--tol", type=float, help="root-finding tolerance")
    g.add_argument("--workers", type=int, help="parallel worker processes")
    g.add_argument("--n-grid", type=int, help="points of the snapshot time grid")
    g.add_argument("--band", type=float, help="relative band for alpha_hat")
    g.add_argument("--tv-max", type=float, help="TV / relative-error threshold of verdicts")
    g.add_argument("--require-alpha", action="store_true", default=None)
    g.add_argument("--detection-free", action="store_true", default=None, help="admit delta = 0")
    g.add_argument("--lifespan", help="exponential:RATE, point:L or table:FILE")
    g.add_argument("--intensity", help="exponential or polynomial:R")
    g.add_argument("--horizons", help="comma-separated horizons for paradox")

    parser = _Parser(prog="epicluster", description="Cluster-structured epidemic toolkit")
    parser.add_argument("--version", action="version", version=f"epicluster {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "analyze": "growth rate, constants and limiting size profiles",
        "simulate": "exact simulation with event logs and snapshots",
        "compare": "pooled simulation against the limiting profiles",
        "ode": "mean-field ODE trajectory and its growth rate",
        "paradox": "dead-lifespan mean of a growing cohort",
        "yule": "detection-free run against the Yule-Simon law",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = resolve(args.command, args.config, overrides)
        return HANDLERS[args.command](cfg)
    except UsageError as exc:
        print(f"epicluster: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotSupercriticalError, TruncationError, stats.InsufficientDataError,
            ArithmeticError, NumericalError) as exc:
        print(f"epicluster: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"epicluster: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
