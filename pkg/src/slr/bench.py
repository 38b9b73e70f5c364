"""Monte-Carlo experiment runner for the shuffled-regression benchmarks."""
from __future__ import annotations

import configparser
import logging
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from . import baselines
from .metrics import (
    TrialMetrics, nmse, optimality_gap, permutation_error_rate, reconstruction_mse, to_db,
)
from .model import SolverConfig, generate_dense_problem, generate_sparse_problem
from .registration import (
    generate_scene, register, register_with_correspondence, reconstruct_model, synthetic_model,
)
from .solvers import estimate_permutation, solve_with_permutation
from .spectral import build_signal_basis

log = logging.getLogger(__name__)

# swept parameter per experiment kind
KINDS = {
    "ls_vs_snr": "snr_db",
    "ls_vs_pe": "p_e",
    "ls_vs_t": "t",
    "ls_vs_n": "n",
    "lasso_vs_snr": "snr_db",
    "lasso_vs_t": "t",
    "lasso_vs_sparsity": "s",
    "registration": "sigma2",
}
DENSE_METHODS = ("spectral", "oracle", "spatial", "leverage", "threshold")
SPARSE_METHODS = ("spectral", "oracle", "threshold", "spatial", "leverage")
REGISTRATION_METHODS = ("spectral", "oracle")

DEFAULTS = {
    "dense": dict(m=200, n=100, t=10_000, snr_db=20.0, p_e=0.5),
    "sparse": dict(m=10, n=30, t=1000, snr_db=20.0, s=2),
    "registration": dict(m=200, sigma2=1e-4, model=None, model_points=20000),
}
INT_PARAMS = {"m", "n", "t", "s", "model_points"}


@dataclass
class ExperimentSpec:
    kind: str
    sweep: List[float]
    fixed: Dict[str, object] = field(default_factory=dict)
    trials: int = 300
    seed: int = 0
    methods: Optional[List[str]] = None
    name: Optional[str] = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {sorted(KINDS)}")
        if not self.sweep:
            raise ValueError("sweep must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        allowed = self.available_methods()
        if self.methods is None:
            self.methods = list(allowed)
        bad = [m for m in self.methods if m not in allowed]
        if bad:
            raise ValueError(f"methods {bad} not available for {self.kind}; choose from {list(allowed)}")
        self.name = self.name or self.kind

    @property
    def family(self) -> str:
        if self.kind == "registration":
            return "registration"
        return "sparse" if self.kind.startswith("lasso") else "dense"

    @property
    def swept(self) -> str:
        return KINDS[self.kind]

    def available_methods(self):
        return {"dense": DENSE_METHODS, "sparse": SPARSE_METHODS,
                "registration": REGISTRATION_METHODS}[self.family]

    def params(self, value) -> dict:
        p = dict(DEFAULTS[self.family])
        p.update(self.fixed)
        p[self.swept] = value
        return {k: (int(v) if k in INT_PARAMS and v is not None else v) for k, v in p.items()}


@dataclass
class ResultRow:
    experiment: str
    method: str
    sweep_value: float
    trial: int
    metrics: TrialMetrics
    error: Optional[str] = None

    def as_record(self) -> dict:
        rec = {"experiment": self.experiment, "method": self.method,
               "sweep_value": float(self.sweep_value), "trial": self.trial}
        m = self.metrics
        rec.update(perm_error_rate=m.perm_error_rate, nmse_x=m.nmse_x, nmse_x_db=m.nmse_x_db,
                   optimality_gap=m.optimality_gap, reconstruction_mse=m.reconstruction_mse,
                   elapsed_ms=1000.0 * m.elapsed)
        rec["error"] = self.error
        return rec


def trial_seed(seed: int, sweep_value, trial: int) -> int:
    """Per-trial seed: the base seed xor a stable hash of (sweep value, trial)."""
    key = f"{float(sweep_value)!r}:{int(trial)}".encode()
    return (int(seed) ^ zlib.crc32(key)) & 0xFFFFFFFF


def _regression_trial(spec: ExperimentSpec, value, trial: int) -> List[ResultRow]:
    p = spec.params(value)
    seed = trial_seed(spec.seed, value, trial)
    sparse = spec.family == "sparse"
    if sparse:
        problem, truth = generate_sparse_problem(p["m"], p["n"], p["t"], p["snr_db"], p["s"], seed, spec.solver)
    else:
        problem, truth = generate_dense_problem(p["m"], p["n"], p["t"], p["snr_db"], p["p_e"], seed, spec.solver)
    try:
        signal = build_signal_basis(problem.A, truth.C_X, spec.solver)
    except ValueError:
        signal = None

    rows = []
    for method in spec.methods:
        t0 = time.perf_counter()
        metrics = TrialMetrics()
        error = None
        try:
            if method == "spectral":
                perm = estimate_permutation(problem, truth.C_X)[0].perm
            elif method == "oracle":
                perm = truth.perm
            else:
                perm = getattr(baselines, f"{method}_match")(problem)
            sol = solve_with_permutation(problem, perm, sparse, method)
            value_nmse = nmse(sol.X_hat, truth.X)
            metrics = TrialMetrics(
                perm_error_rate=permutation_error_rate(perm, truth.perm),
                nmse_x=value_nmse,
                nmse_x_db=to_db(value_nmse),
                optimality_gap=(optimality_gap(perm, truth.perm, signal)
                                if signal is not None else float("nan")),
                reconstruction_mse=reconstruction_mse(perm, sol.X_hat, truth.perm, truth.X, problem.A),
            )
            if sol.unconverged:
                error = f"MaxItersExceeded({len(sol.unconverged)} columns)"
        except Exception as exc:  # one failed solve must not abort the sweep
            error = type(exc).__name__
            log.debug("trial %s/%s/%s failed: %s", method, value, trial, exc)
        metrics.elapsed = time.perf_counter() - t0
        rows.append(ResultRow(spec.name, method, value, trial, metrics, error))
    return rows


_MODEL_CACHE = {}


def _registration_model(p):
    key = (p.get("model"), p.get("model_points"))
    if key not in _MODEL_CACHE:
        if p.get("model"):
            from .io import load_point_cloud
            _MODEL_CACHE[key] = load_point_cloud(p["model"])
        else:
            _MODEL_CACHE[key] = synthetic_model(p["model_points"])
    return _MODEL_CACHE[key]


def _registration_trial(spec: ExperimentSpec, value, trial: int) -> List[ResultRow]:
    p = spec.params(value)
    seed = trial_seed(spec.seed, value, trial)
    scene, truth = generate_scene(_registration_model(p), p["m"], float(p["sigma2"]), seed)
    rows = []
    for method in spec.methods:
        t0 = time.perf_counter()
        metrics = TrialMetrics()
        error = None
        try:
            if method == "spectral":
                result = register(scene, truth, spec.solver)
            else:
                result = register_with_correspondence(scene, truth.perm)
            Q_hat = reconstruct_model(scene, result)
            D = Q_hat - scene.Q.points
            metrics = TrialMetrics(
                perm_error_rate=permutation_error_rate(result.perm, truth.perm),
                reconstruction_mse=float(np.sum(D * D) / D.size),
            )
        except Exception as exc:
            error = type(exc).__name__
        metrics.elapsed = time.perf_counter() - t0
        rows.append(ResultRow(spec.name, method, value, trial, metrics, error))
    return rows


def _run_task(args):
    spec, value, trial = args
    if spec.family == "registration":
        return _registration_trial(spec, value, trial)
    return _regression_trial(spec, value, trial)


def _sort_key(spec: ExperimentSpec):
    order = {m: i for i, m in enumerate(spec.methods)}
    return lambda r: (float(r.sweep_value), order[r.method], r.trial)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SLR_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> List[ResultRow]:
    """Run every (sweep value, trial, method) and return rows in a fixed order."""
    tasks = [(spec, v, k) for v in spec.sweep for k in range(spec.trials)]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=_sort_key(spec))
    return rows


SUMMARY_COLUMNS = ("experiment", "method", "sweep_value", "trials", "errors", "statistic",
                   "perm_error_rate", "nmse_x", "nmse_x_db", "optimality_gap", "reconstruction_mse")


def summarize(rows: List[ResultRow]) -> List[dict]:
    """Median, mean and 10/90% quantiles per (method, sweep value)."""
    groups: Dict[tuple, List[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.experiment, r.method, float(r.sweep_value)), []).append(r)
    fields = ("perm_error_rate", "nmse_x", "optimality_gap", "reconstruction_mse")
    out = []
    for (exp, method, value), group in groups.items():
        ok = [r for r in group if r.error is None or r.error.startswith("MaxIters")]
        data = {f: np.array([getattr(r.metrics, f) for r in ok], dtype=float) for f in fields}
        for stat, fn in (("median", np.median), ("mean", np.mean),
                         ("q10", lambda a: np.quantile(a, 0.1)), ("q90", lambda a: np.quantile(a, 0.9))):
            rec = {"experiment": exp, "method": method, "sweep_value": value,
                   "trials": len(group), "errors": len(group) - len(ok), "statistic": stat}
            for f in fields:
                a = data[f][np.isfinite(data[f])]
                rec[f] = float(fn(a)) if a.size else float("nan")
            rec["nmse_x_db"] = to_db(rec["nmse_x"]) if np.isfinite(rec["nmse_x"]) else float("nan")
            out.append(rec)
    return out


def _parse_list(text: str) -> List[str]:
    return [tok.strip() for tok in text.replace("\n", ",").split(",") if tok.strip()]


def _parse_scalar(text: str):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_spec(path) -> ExperimentSpec:
    """Read an INI experiment file with ``[experiment]``, ``[fixed]`` and ``[solver]`` sections."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    return spec_from_config(cp)


def spec_from_config(cp: configparser.ConfigParser) -> ExperimentSpec:
    if "experiment" not in cp:
        raise ValueError("experiment file needs an [experiment] section")
    e = cp["experiment"]
    if "kind" not in e or "sweep" not in e:
        raise ValueError("[experiment] needs 'kind' and 'sweep'")
    sweep = [float(v) for v in _parse_list(e["sweep"])]
    fixed = {k: _parse_scalar(v) for k, v in cp["fixed"].items()} if "fixed" in cp else {}
    solver = SolverConfig()
    if "solver" in cp:
        s = cp["solver"]
        mc = s.get("max_components", "all").strip()
        solver = SolverConfig(
            gap_threshold=s.getfloat("gap_threshold", solver.gap_threshold),
            max_components="all" if mc == "all" else int(mc),
            rho=s.getfloat("rho", solver.rho),
            lasso_tol=s.getfloat("lasso_tol", solver.lasso_tol),
            lasso_max_iters=s.getint("lasso_max_iters", solver.lasso_max_iters),
        )
    methods = _parse_list(e["methods"]) if "methods" in e else None
    return ExperimentSpec(
        kind=e["kind"].strip(), sweep=sweep, fixed=fixed, trials=e.getint("trials", 300),
        seed=e.getint("seed", 0), methods=methods, name=e.get("name"), solver=solver,
    )


def apply_preset(spec: ExperimentSpec, preset: str) -> ExperimentSpec:
    """``desk``: m = 100 for regression runs, t capped at 10^4, 30 trials."""
    if preset != "desk":
        raise ValueError(f"unknown preset {preset!r}")
    fixed = dict(spec.fixed)
    sweep = list(spec.sweep)
    if spec.family == "dense":
        fixed["m"] = 100
        n = fixed.get("n", DEFAULTS["dense"]["n"])
        if spec.swept == "n":
            sweep = [v for v in sweep if v <= 100] or [50.0]
        else:
            fixed["n"] = min(int(n), 50)
    if "t" in fixed:
        fixed["t"] = min(int(fixed["t"]), 10_000)
    if spec.swept == "t":
        sweep = [v for v in sweep if v <= 10_000] or [10_000.0]
    return replace(spec, fixed=fixed, sweep=sweep, trials=30)
