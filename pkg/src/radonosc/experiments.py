"""Reproducible experiments, their configuration and the emitted report tables."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .circle import (cont_multiplier, cubic_example_psi, exp_multiplier, gauss_decay_fit, gauss_sum,
                     kernel_l1_mass, RationalPoint)
from .estimators import build_body, build_kernel
from .exceptions import BudgetExceededError
from .kernels import verify_cancellation, verify_size_and_holder
from .lattice import GridFunction, LatticeFunction, MultiIndexSet, lp_norm
from .martingales import ChristCubeSystem, martingale_oscillation_probe
from .radon import pushforward_points, radon_family
from .seminorms import (SampledFamily, TruncationGrid, long_short_split, short_variation_norm,
                        sup_oscillation_norm_p2, worst_sequence_search)

SCHEMA_VERSION = "1"
CSV_COLUMNS = ("experiment", "scale", "p", "N", "statistic", "value", "tolerance", "pass")
EXPERIMENTS = ("verify-kernel", "probe-oscillation", "gauss-table", "multiplier-scan",
               "martingale-probe", "split-check")


class ConfigError(ValueError):
    """Bad configuration; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# default values fix the type of every key
DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "gamma": "3",
    "kernel.name": "hilbert",
    "kernel.component": 1,
    "kernel.samples": 100_000,
    "kernel.annuli": 100,
    "body.shape": "ball",
    "body.inner_radius": 0.0,
    "grid.t_min": 1.0,
    "grid.t_max": 16.0,
    "grid.count": 64,
    "seminorm.p": 2.0,
    "seminorm.N": 8,
    "seminorm.strategy": "random-restarts",
    "seminorm.restarts": 200,
    "input.half_widths": "64,128,256,512",
    "input.trials": 2,
    "input.zero": False,
    "probe.spread_tolerance": 0.25,
    "probe.slope_tolerance": 0.05,
    "multiplier.t_values": "10,100,1000",
    "multiplier.xi_max": 3,
    "multiplier.pairs": 100,
    "multiplier.tolerance": 1e-6,
    "gauss.q_max": 101,
    "gauss.denominators": "primes",
    "gauss.expected_delta": 0.5,
    "gauss.delta_tolerance": 0.05,
    "martingale.weights": "1",
    "martingale.levels": "0,1,2,3",
    "martingale.nodes": 64,
    "martingale.trials": 3,
    "martingale.drift_tolerance": 0.25,
    "split.tau": 0.5,
    "split.families": 1000,
    "split.length": 32,
    "split.sites": 4,
    "split.constant": 4.0,
    "budget.cells": 200_000_000,
}

PRESETS: dict[str, dict[str, Any]] = {
    "cubic-hilbert": {"gamma": "3", "kernel.name": "hilbert", "body.shape": "ball"},
    "zero": {"input.zero": True},
}


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot read {raw!r} as {type(default).__name__}") from None
    return raw


def parse_config(text: str) -> dict[str, Any]:
    """Read ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(key, "unknown key")
        out[key] = _coerce(key, val)
    return out


@dataclass
class ExperimentConfig:
    experiment: str
    values: dict[str, Any] = field(default_factory=dict)
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}")
        merged = dict(DEFAULTS)
        for k, v in self.values.items():
            if k not in DEFAULTS:
                raise ConfigError(k, "unknown key")
            merged[k] = _coerce(k, str(v)) if isinstance(v, str) else v
        self.values = merged
        if self.values["budget.cells"] <= 0:
            raise ConfigError("budget.cells", "must be positive")
        if self.threads < 1:
            raise ConfigError("threads", "must be positive")

    def __getitem__(self, key: str):
        return self.values[key]

    def ints(self, key: str) -> list[int]:
        try:
            return [int(v) for v in str(self[key]).split(",") if v.strip()]
        except ValueError:
            raise ConfigError(key, "expected comma-separated integers") from None

    def floats(self, key: str) -> list[float]:
        try:
            return [float(v) for v in str(self[key]).split(",") if v.strip()]
        except ValueError:
            raise ConfigError(key, "expected comma-separated numbers") from None

    def gamma(self) -> MultiIndexSet:
        """``3`` or ``1,0;0,1;1,1``: multi-indices separated by semicolons."""
        try:
            return MultiIndexSet(tuple(tuple(int(v) for v in part.split(",")) for part in str(self["gamma"]).split(";")))
        except ValueError as exc:
            raise ConfigError("gamma", str(exc)) from None

    def kernel(self, k: int):
        try:
            return build_kernel(self["kernel.name"], k, self["kernel.component"])
        except ValueError as exc:
            raise ConfigError("kernel.name", str(exc)) from None

    def body(self, k: int):
        c = self["body.inner_radius"] or None
        try:
            return build_body(self["body.shape"], k, c)
        except ValueError as exc:
            raise ConfigError("body.shape", str(exc)) from None


@dataclass
class Row:
    experiment: str
    scale: str
    p: str
    N: str
    statistic: str
    value: float
    tolerance: str
    passed: bool

    def csv_cells(self) -> list[str]:
        return [self.experiment, self.scale, self.p, self.N, self.statistic, repr(float(self.value)),
                self.tolerance, "true" if self.passed else "false"]


@dataclass
class Report:
    experiment: str
    config: dict[str, Any]
    seed: int
    rows: list[Row] = field(default_factory=list)
    complete: bool = True
    message: str = ""
    timings: dict[str, float] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def add(self, scale, statistic, value, tolerance=None, passed=True, p="", N=""):
        tol = "" if tolerance is None else repr(float(tolerance))
        self.rows.append(Row(self.experiment, str(scale), str(p), str(N), statistic, float(value), tol, bool(passed)))

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> str:
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {d.get('schema_version')!r}")
        d["rows"] = [Row(**r) for r in d["rows"]]
        return cls(**d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_cells())
        return buf.getvalue()


def emit_tables(report: Report, fmt: str, out_dir: str | Path | None = None) -> str:
    """Render the report as csv or json; write ``<experiment>.<fmt>`` into ``out_dir`` if given."""
    if fmt == "csv":
        text = report.to_csv()
    elif fmt == "json":
        text = report.to_json() + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out_dir is not None:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"{report.experiment}.{fmt}").write_text(text)
    return text


# ---------------------------------------------------------------------------
# experiment bodies


def _verify_kernel(cfg: ExperimentConfig, rep: Report, rng: np.random.Generator):
    gamma = cfg.gamma()
    K, body = cfg.kernel(gamma.k), cfg.body(gamma.k)
    n = cfg["kernel.samples"]
    first = verify_size_and_holder(K, n, rng.integers(2 ** 63))
    second = verify_size_and_holder(K, 2 * n, rng.integers(2 ** 63))
    rep.add(n, "size_ratio", first.size_ratio, 1 + 1e-12, first.size_ratio <= 1 + 1e-12)
    rep.add(n, "holder_ratio", first.holder_ratio)
    rep.add(2 * n, "holder_ratio", second.holder_ratio)
    drift = abs(second.holder_ratio - first.holder_ratio) / first.holder_ratio
    rep.add(2 * n, "holder_drift", drift, 0.01, drift <= 0.01)
    m = cfg["kernel.annuli"]
    r = np.exp(rng.uniform(np.log(1e-3), np.log(1e2), m))
    R = r * np.exp(rng.uniform(0.01, np.log(1e3), m))
    worst = max(verify_cancellation(K, body, a, b) for a, b in zip(r, R))
    rep.add(m, "cancellation_max", worst, 1e-13, worst <= 1e-13)


def _random_input(rng, shape, zero: bool, p: float) -> np.ndarray:
    if zero:
        return np.zeros(shape)
    x = rng.standard_normal(shape)
    return x / lp_norm(LatticeFunction(x), p)


def _check_cells(cells: int, cfg: ExperimentConfig, what: str):
    if cells > cfg["budget.cells"]:
        raise BudgetExceededError(f"{what} needs {cells} cells, budget is {cfg['budget.cells']}")


def _probe_oscillation(cfg: ExperimentConfig, rep: Report, rng: np.random.Generator):
    gamma = cfg.gamma()
    K, body = cfg.kernel(gamma.k), cfg.body(gamma.k)
    grid = TruncationGrid.logspace(cfg["grid.t_min"], cfg["grid.t_max"], cfg["grid.count"])
    p, N = cfg["seminorm.p"], cfg["seminorm.N"]
    _, Z, _ = pushforward_points(K, body, gamma, grid.as_array()[-1], cfg["budget.cells"])
    span = (Z.max(axis=0) - Z.min(axis=0)) if len(Z) else np.zeros(len(gamma), int)
    widths = cfg.ints("input.half_widths")
    ratios = []
    for M in widths:
        shape = (2 * M + 1,) * len(gamma)
        _check_cells(len(grid) * int(np.prod(np.array(shape) + span + 1)), cfg, f"half-width {M}")
        best = 0.0
        for trial in range(cfg["input.trials"]):
            f = LatticeFunction(_random_input(rng, shape, cfg["input.zero"], p), (-M,) * len(gamma))
            norm = lp_norm(f, p)
            if norm == 0:
                continue
            fam = radon_family(f, K, body, gamma, grid, cfg["budget.cells"])
            res = worst_sequence_search(fam, p, N, cfg["seminorm.strategy"], cfg["seminorm.restarts"],
                                        int(rng.integers(2 ** 63)), cfg.threads)
            best = max(best, res.value / norm)
        ratios.append(best)
        rep.add(M, "ratio", best, p=p, N=N)
    r = np.array(ratios)
    spread = float(r.max() / r.min() - 1) if r.min() > 0 else (0.0 if r.max() == 0 else math.inf)
    slope = float(np.polyfit(np.log(widths), np.log(r), 1)[0]) if r.min() > 0 and len(r) > 1 else 0.0
    st, sl = cfg["probe.spread_tolerance"], cfg["probe.slope_tolerance"]
    rep.add("all", "spread", spread, st, spread <= st, p=p, N=N)
    rep.add("all", "loglog_slope", slope, sl, slope <= sl, p=p, N=N)


def _gauss_table(cfg: ExperimentConfig, rep: Report, rng: np.random.Generator):
    gamma = cfg.gamma()
    fit = gauss_decay_fit(gamma, cfg["gauss.q_max"], cfg["gauss.denominators"], cfg["budget.cells"])
    for q, g in fit.table:
        rep.add(q, "max_abs_gauss", g, 1.0, g <= 1.0)
    g0 = gauss_sum(RationalPoint((0,) * len(gamma), 1), gamma)
    rep.add(1, "gauss_zero", abs(g0 - 1), 0.0, g0 == 1)
    exp, tol = cfg["gauss.expected_delta"], cfg["gauss.delta_tolerance"]
    ok = math.isfinite(fit.delta) and abs(fit.delta - exp) <= tol
    rep.add("fit", "delta_hat", fit.delta, tol, ok)


def _multiplier_scan(cfg: ExperimentConfig, rep: Report, rng: np.random.Generator):
    gamma = cfg.gamma()
    K, body = cfg.kernel(gamma.k), cfg.body(gamma.k)
    d = len(gamma)
    xs = np.arange(-cfg["multiplier.xi_max"], cfg["multiplier.xi_max"] + 1, dtype=float)
    pts = np.stack(np.meshgrid(*([xs] * d), indexing="ij"), axis=-1).reshape(-1, d)
    for t in cfg.floats("multiplier.t_values"):
        m = exp_multiplier(pts, K, body, gamma, t, cfg["budget.cells"])
        worst = float(np.max(np.abs(m)))
        rep.add(t, "max_abs_m_integer", worst, 1e-10, worst <= 1e-10)
        xi = rng.uniform(-0.5, 0.5, (32, d))
        bound = kernel_l1_mass(K, body, gamma, t, cfg["budget.cells"])
        top = float(np.max(np.abs(exp_multiplier(xi, K, body, gamma, t, cfg["budget.cells"]))))
        rep.add(t, "triangle_slack", bound - top, 0.0, top <= bound * (1 + 1e-12))
    tol = cfg["multiplier.tolerance"]
    n = cfg["multiplier.pairs"]
    side = max(1, int(round(math.sqrt(n))))
    cubic = K.name == "hilbert" and gamma.exponents == ((3,),) and body.shape == "ball"
    if cubic:
        worst = 0.0
        for xi in np.logspace(-3, 1, side):
            for t in np.logspace(0, 1, side):
                worst = max(worst, abs(cont_multiplier(xi, K, body, gamma, t).value - cubic_example_psi(xi, t)))
        rep.add(side * side, "psi_closed_form_error", worst, tol, worst <= tol)
    else:
        worst = 0.0
        for _ in range(min(n, 20)):
            xi = rng.uniform(-2, 2, d)
            a = cont_multiplier(xi, K, body, gamma, 2.0).value
            b = cont_multiplier(-xi, K, body, gamma, 2.0).value
            worst = max(worst, abs(a - np.conj(b)))
        rep.add(min(n, 20), "conjugate_symmetry_error", worst, 1e-10, worst <= 1e-10)


def _smooth_random(rng, dim: int, extent: float):
    centres = rng.uniform(0.2 * extent, 0.8 * extent, (6, dim))
    amps = rng.standard_normal(6)
    widths = rng.uniform(0.05, 0.15, 6) * extent

    def func(X):
        out = np.zeros(X.shape[:-1])
        for c, a, w in zip(centres, amps, widths):
            out += a * np.exp(-np.sum((X - c) ** 2, axis=-1) / (2 * w * w))
        return out

    return func


def _martingale_probe(cfg: ExperimentConfig, rep: Report, rng: np.random.Generator):
    weights = tuple(cfg.ints("martingale.weights"))
    levels = cfg.ints("martingale.levels")
    system = ChristCubeSystem(weights, 2, min(levels), max(levels))
    n = cfg["martingale.nodes"]
    p = cfg["seminorm.p"]
    extent = float(n)
    _check_cells(2 * (2 * n) ** len(weights) * len(levels), cfg, "martingale grids")
    worst = 0.0
    for trial in range(cfg["martingale.trials"]):
        func = _smooth_random(rng, len(weights), extent)
        vals = []
        for h in (1.0, 0.5):
            upper = [extent - h] * len(weights)
            f = GridFunction.sample(func, [0.0] * len(weights), upper, h)
            if cfg["input.zero"]:
                f = f.with_values(np.zeros(f.shape))
            vals.append(martingale_oscillation_probe(f, levels, system, p).ratio)
            rep.add(f"trial{trial}:h={h:g}", "ratio", vals[-1], p=p)
        drift = abs(vals[1] - vals[0]) / vals[0] if vals[0] > 0 else 0.0
        worst = max(worst, drift)
    tol = cfg["martingale.drift_tolerance"]
    rep.add("refinement", "max_drift", worst, tol, worst <= tol, p=p)


def _split_check(cfg: ExperimentConfig, rep: Report, rng: np.random.Generator):
    T, X = cfg["split.length"], cfg["split.sites"]
    tau, C = cfg["split.tau"], cfg["split.constant"]
    grid = TruncationGrid.logspace(cfg["grid.t_min"], cfg["grid.t_max"], T)
    worst = 0.0
    for _ in range(cfg["split.families"]):
        steps = rng.standard_normal((T, X)) * rng.uniform(0, 1, (T, 1)) ** 3
        fam = SampledFamily(grid, np.cumsum(steps, axis=0))
        full = sup_oscillation_norm_p2(fam)[1]
        split = long_short_split(fam, tau)
        rhs = sup_oscillation_norm_p2(split.long_family)[1] + short_variation_norm(split, 2.0)
        if rhs > 0:
            worst = max(worst, full / rhs)
    rep.add(cfg["split.families"], "split_ratio_max", worst, C, worst <= C, p=2.0)


RUNNERS: dict[str, Callable] = {
    "verify-kernel": _verify_kernel,
    "probe-oscillation": _probe_oscillation,
    "gauss-table": _gauss_table,
    "multiplier-scan": _multiplier_scan,
    "martingale-probe": _martingale_probe,
    "split-check": _split_check,
}


def run_experiment(cfg: ExperimentConfig, seed: int | None = None) -> Report:
    """Run one experiment; a budget overrun returns the rows so far with ``complete=False``."""
    seed = int(cfg["seed"] if seed is None else seed)
    rep = Report(cfg.experiment, {k: cfg.values[k] for k in sorted(cfg.values)}, seed)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    try:
        RUNNERS[cfg.experiment](cfg, rep, rng)
    except BudgetExceededError as exc:
        rep.complete = False
        rep.message = str(exc)
    rep.timings["total_seconds"] = time.perf_counter() - start
    return rep
