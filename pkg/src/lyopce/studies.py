"""Case studies: time-resolved UQ, one-at-a-time sensitivity, chance-constrained
shelf-temperature design and time-optimal secondary drying.

Sampling policy.  For a given seed, the PCE fitting runs use rows
``0 .. n_pce - 1`` of the per-row sample stream and the Monte Carlo ensemble
uses rows ``0 .. n_mc - 1`` of the same stream, so the fitting set is a prefix
of the MC set.  Surrogate resamples come from the separate block stream.

Samples whose primary drying finishes before the end of the output grid hold
their final state on the remaining grid nodes.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .distributions import (
    Gaussian,
    UncertainInput,
    Uniform,
    apply_values,
    distribution_from_dict,
    distribution_to_dict,
    draw_block,
    draw_samples,
)
from .montecarlo import DEFAULT_MC_SAMPLES, ensemble_statistics, run_ensemble
from .pce import (
    DEFAULT_ORDER,
    DEFAULT_PCE_SAMPLES,
    DEFAULT_RESAMPLES,
    PceSurrogate,
    evaluate_basis,
    fit_surrogate,
    surrogate_moments,
)
from .physics import (
    ModelParameters,
    ProcessConditions,
    default_conditions,
    default_parameters,
)
from .primary import DEFAULT_NODES, simulate_primary
from .secondary import TARGET_CONCENTRATION, simulate_secondary
from .stats import EmpiricalDistribution, confidence_interval, ks_distance
from .util import write_csv, write_json

__all__ = [
    "StudyConfig",
    "ChanceResult",
    "UqResult",
    "DesignResult",
    "OptimizationResult",
    "InfeasibleError",
    "MonotonicityError",
    "case_config",
    "run_uq_study",
    "one_at_a_time_study",
    "chance_probability",
    "design_min_shelf_temperature",
    "minimize_drying_time",
    "benchmark_methods",
    "PrimaryResponse",
    "SecondaryResponse",
    "ConcentrationResponse",
]

log = logging.getLogger(__name__)

HOUR = 3600.0
SHELF_TOLERANCE = 0.1  # K
TIME_TOLERANCE = 0.01 * HOUR
MONOTONE_SLACK = 0.02  # allowed probability dip between scan points
BENCHMARK_REPS = 10

_METHODS = ("pce", "mc", "both")
_MODELS = ("primary", "secondary")


class InfeasibleError(RuntimeError):
    """The probability target cannot be met inside the admissible range."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class MonotonicityError(RuntimeError):
    """The coarse scan contradicts the monotonicity the search relies on."""

    def __init__(self, message, scan):
        super().__init__(message)
        self.scan = scan


# ---------------------------------------------------------------- responses


def _hold(t_out, values, grid):
    """Values on ``grid``; nodes past the end of the run repeat the last value."""
    values = np.asarray(values)
    k = int(np.searchsorted(grid, t_out[-1], side="right"))
    k = min(k, len(values))
    out = np.empty(len(grid))
    out[:k] = values[:k]
    out[k:] = values[-1]
    return out


@dataclass(frozen=True)
class PrimaryResponse:
    """Frozen-layer mean temperature then front position on ``grid``."""

    grid: tuple
    N: int = DEFAULT_NODES

    names = ("T_product", "S")
    units = ("K", "m")

    def __call__(self, params, conditions):
        grid = np.asarray(self.grid)
        tr = simulate_primary(params, conditions, self.N, t_end=grid[-1], output_grid=grid)
        return np.concatenate([_hold(tr.t, tr.T_mean, grid), _hold(tr.t, tr.S, grid)])


@dataclass(frozen=True)
class SecondaryResponse:
    """Mean temperature then mean bound water on ``grid``."""

    grid: tuple
    N: int = DEFAULT_NODES

    names = ("T_product", "cw_mean")
    units = ("K", "kg/kg")

    def __call__(self, params, conditions):
        grid = np.asarray(self.grid)
        tr = simulate_secondary(params, conditions, self.N, t_end=grid[-1], output_grid=grid)
        return np.concatenate([tr.T_mean, tr.cw_mean])


@dataclass(frozen=True)
class ConcentrationResponse:
    """Mean bound water at a single time, with the shelf temperature set."""

    t: float
    T_b: float
    N: int = DEFAULT_NODES

    def __call__(self, params, conditions):
        conditions = conditions.replace(T_b=self.T_b)
        if self.t <= conditions.t_0:
            return np.array([conditions.cw_0])
        tr = simulate_secondary(
            params, conditions, self.N, t_end=self.t, output_grid=[self.t]
        )
        return tr.cw_mean[-1:]


# ---------------------------------------------------------------- config


def _default_inputs(model: str) -> tuple:
    if model == "primary":
        return (
            UncertainInput("h", Gaussian(15.0, 3.0)),
            UncertainInput("R0", Uniform(1e4, 2e4)),
            UncertainInput("R1", Uniform(1e7, 3e7)),
        )
    return (
        UncertainInput("cw_0", Gaussian(0.088, 0.018)),
        UncertainInput("f_a", Uniform(0.3, 0.5)),
        UncertainInput("h", Gaussian(15.0, 3.0)),
    )


@dataclass(frozen=True)
class StudyConfig:
    """Everything a study needs besides the code.

    ``t_end`` is the UQ horizon, and for time-optimal control the latest
    admissible drying time.  Times are in seconds.
    """

    model: str = "secondary"
    inputs: tuple = ()
    method: str = "both"
    pce_samples: int = DEFAULT_PCE_SAMPLES
    mc_samples: int = DEFAULT_MC_SAMPLES
    resamples: int = DEFAULT_RESAMPLES
    band_resamples: int = 10_000
    order: int = DEFAULT_ORDER
    n_times: int = 200
    t_end: Optional[float] = None
    seed: int = 0
    N: int = DEFAULT_NODES
    level: float = 0.95
    target_time: float = 7.0 * HOUR
    probability: float = 0.95
    concentration: float = TARGET_CONCENTRATION
    T_b_bounds: tuple = (273.0, 295.0)
    scan_points: int = 5
    workers: int = 1
    params: Optional[ModelParameters] = None
    conditions: Optional[ProcessConditions] = None

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if not self.inputs:
            object.__setattr__(self, "inputs", _default_inputs(self.model))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        names = [i.name for i in self.inputs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate uncertain inputs in {names}")
        if self.params is None:
            object.__setattr__(self, "params", default_parameters())
        if self.conditions is None:
            object.__setattr__(self, "conditions", default_conditions(self.model))
        if self.t_end is None:
            t_end = 2.0 * HOUR if self.model == "primary" else 10.0 * HOUR
            object.__setattr__(self, "t_end", self.conditions.t_0 + t_end)
        object.__setattr__(self, "T_b_bounds", tuple(float(b) for b in self.T_b_bounds))
        checks = [
            (0.0 < self.level < 1.0, "level must lie in (0, 1)"),
            (0.0 <= self.probability <= 1.0, "probability must lie in [0, 1]"),
            (self.T_b_bounds[0] <= self.T_b_bounds[1], "T_b_bounds must be ordered"),
            (self.T_b_bounds[0] > 0, "T_b_bounds must be positive temperatures"),
            (self.t_end > self.conditions.t_0, "t_end must exceed t_0"),
            (self.target_time > 0, "target_time must be positive"),
            (self.concentration > 0, "concentration target must be positive"),
            (self.pce_samples >= 1 and self.mc_samples >= 1, "sample counts must be >= 1"),
            (self.resamples >= 1000, "resamples must be >= 1000"),
            (1000 <= self.band_resamples <= self.resamples,
             "band_resamples must lie in [1000, resamples]"),
            (self.order >= 0, "order must be >= 0"),
            (self.n_times >= 2, "n_times must be >= 2"),
            (self.scan_points >= 2, "scan_points must be >= 2"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.seed >= 0, "seed must be non-negative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.conditions.t_0, self.t_end, self.n_times)

    def replace(self, **changes) -> "StudyConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k == "inputs":
                v = [
                    {"name": i.name, "distribution": distribution_to_dict(i.distribution)}
                    for i in self.inputs
                ]
            elif k == "T_b_bounds":
                v = list(v)
            out[k] = v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StudyConfig":
        data = dict(data)
        if "inputs" in data:
            data["inputs"] = tuple(
                UncertainInput(d["name"], distribution_from_dict(d["distribution"]))
                for d in data["inputs"]
            )
        if isinstance(data.get("params"), dict):
            data["params"] = ModelParameters(**data["params"])
        if isinstance(data.get("conditions"), dict):
            data["conditions"] = ProcessConditions(**data["conditions"])
        return cls(**data)


def case_config(case: str, **overrides) -> StudyConfig:
    """Preset for the four case studies ``A1``, ``A2``, ``B1``, ``B2``."""
    case = case.upper()
    presets = {
        "A1": dict(model="primary"),
        "A2": dict(model="secondary"),
        "B1": dict(model="secondary", method="pce", T_b_bounds=(290.0, 330.0)),
        "B2": dict(
            model="secondary", method="pce", T_b_bounds=(273.0, 295.0), t_end=20.0 * HOUR
        ),
    }
    if case not in presets:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(presets)}")
    return StudyConfig(**{**presets[case], **overrides})


def _split_inputs(config: StudyConfig):
    """Active inputs, plus base parameters with degenerate inputs pinned."""
    active = tuple(i for i in config.inputs if not i.distribution.degenerate)
    fixed = tuple(i for i in config.inputs if i.distribution.degenerate)
    params, conditions = apply_values(
        config.params, config.conditions, fixed, [i.distribution.nominal for i in fixed]
    )
    return active, params, conditions


# ---------------------------------------------------------------- UQ


@dataclass(frozen=True)
class OutputSeries:
    """Time-resolved mean and equal-tail band of one output."""

    name: str
    unit: str
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


@dataclass
class UqResult:
    config: StudyConfig
    times: np.ndarray
    series: dict = field(default_factory=dict)  # method -> [OutputSeries]
    final: dict = field(default_factory=dict)  # method -> [EmpiricalDistribution]
    ks: dict = field(default_factory=dict)  # output name -> KS distance
    timings: dict = field(default_factory=dict)  # method -> seconds
    surrogate: Optional[PceSurrogate] = None
    n_failures: int = 0

    def write(self, out_dir) -> None:
        """CSV series, final-time samples, ``summary.json`` and, separately,
        ``timings.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary = {"config": self.config.to_dict(), "methods": {}, "ks": self.ks}
        for method, series in self.series.items():
            header = ["t [s]"]
            cols = [self.times]
            for s in series:
                header += [f"{s.name}_mean [{s.unit}]", f"{s.name}_lo [{s.unit}]",
                           f"{s.name}_hi [{s.unit}]"]  # fmt: skip
                cols += [s.mean, s.lo, s.hi]
            write_csv(out / f"series_{method}.csv", header, np.column_stack(cols))
            finals = self.final[method]
            write_csv(
                out / f"final_{method}.csv",
                [f"{s.name} [{s.unit}]" for s in series],
                np.column_stack([d.samples for d in finals]),
            )
            summary["methods"][method] = {
                s.name: {
                    "final_mean": d.mean,
                    "final_ci": list(confidence_interval(d, self.config.level)),
                    "final_min": float(d.samples[0]),
                    "final_max": float(d.samples[-1]),
                }
                for s, d in zip(series, finals)
            }
        if self.surrogate is not None:
            (out / "surrogate.json").write_text(self.surrogate.to_json())
        summary["n_failures"] = self.n_failures
        write_json(out / "summary.json", summary)
        write_json(out / "timings.json", self.timings)


def _response(config: StudyConfig, grid):
    cls = PrimaryResponse if config.model == "primary" else SecondaryResponse
    return cls(tuple(float(t) for t in grid), config.N)


def _split_outputs(flat, names, units, n_times, level, method):
    """Series from per-output column blocks (``mean``, ``lo``, ``hi``)."""
    mean, lo, hi = flat
    return [
        OutputSeries(
            name, unit, mean[k * n_times:(k + 1) * n_times],
            lo[k * n_times:(k + 1) * n_times], hi[k * n_times:(k + 1) * n_times],
        )  # fmt: skip
        for k, (name, unit) in enumerate(zip(names, units))
    ]


def _column_quantiles(values_fn, n_cols, q, chunk=32):
    lo = np.empty(n_cols)
    hi = np.empty(n_cols)
    for a in range(0, n_cols, chunk):
        b = min(a + chunk, n_cols)
        v = values_fn(a, b)
        lo[a:b], hi[a:b] = np.quantile(v, q, axis=0)
    return lo, hi


def _pce_path(config, model, active, params, conditions):
    n_times = config.n_times
    tail = 0.5 * (1.0 - config.level)
    if not active:
        y = model(params, conditions)
        series = (y, y.copy(), y.copy())
        return series, [EmpiricalDistribution.from_samples([v]) for v in y[n_times - 1::n_times]], None, 0
    X = draw_samples(active, config.pce_samples, config.seed)
    ens = run_ensemble(model, active, 0, config.seed, params, conditions, samples=X,
                       workers=config.workers)  # fmt: skip
    ok = ens.ok
    sur = fit_surrogate(active, X[ok], ens.outputs[ok], config.order)
    mean, _ = surrogate_moments(sur)
    psi = evaluate_basis(sur, draw_block(active, config.resamples, config.seed))
    coef = sur.coefficients
    # the band uses a prefix of the resample; final-time laws use all of it
    band = psi[: config.band_resamples]
    lo, hi = _column_quantiles(lambda a, b: band @ coef[:, a:b], coef.shape[1], [tail, 1 - tail])
    last = np.arange(n_times - 1, coef.shape[1], n_times)
    finals = psi @ coef[:, last]
    dists = [EmpiricalDistribution.from_samples(finals[:, j]) for j in range(len(last))]
    return (mean, lo, hi), dists, sur, len(ens.failures)


def _mc_path(config, model, active, params, conditions):
    n_times = config.n_times
    tail = 0.5 * (1.0 - config.level)
    if not active:
        y = model(params, conditions)
        return (y, y.copy(), y.copy()), [EmpiricalDistribution.from_samples([v]) for v in y[n_times - 1::n_times]], 0
    ens = run_ensemble(model, active, config.mc_samples, config.seed, params, conditions,
                       workers=config.workers)  # fmt: skip
    good = ens.outputs[ens.ok]
    stats = ensemble_statistics(ens)
    lo, hi = np.quantile(good, [tail, 1 - tail], axis=0)
    dists = [stats.distributions[j] for j in range(n_times - 1, good.shape[1], n_times)]
    return (stats.mean, lo, hi), dists, len(ens.failures)


def run_uq_study(config: StudyConfig) -> UqResult:
    """Time-resolved mean and ``level`` band of the case outputs.

    ``pce`` fits one surrogate per (output, time node) from ``pce_samples``
    runs; the mean comes from the coefficients, the band from the first
    ``band_resamples`` surrogate evaluations and the final-time distributions
    from all ``resamples`` of them.  ``mc``
    uses ``mc_samples`` full runs; ``both`` also reports the KS distance of
    the final-time distributions.
    """
    grid = config.grid
    model = _response(config, grid)
    active, params, conditions = _split_inputs(config)
    result = UqResult(config=config, times=grid)
    methods = ("pce", "mc") if config.method == "both" else (config.method,)
    for method in methods:
        t0 = time.perf_counter()
        if method == "pce":
            flat, finals, sur, nfail = _pce_path(config, model, active, params, conditions)
            result.surrogate = sur
        else:
            flat, finals, nfail = _mc_path(config, model, active, params, conditions)
        result.timings[method] = time.perf_counter() - t0
        result.series[method] = _split_outputs(
            flat, model.names, model.units, len(grid), config.level, method
        )
        result.final[method] = finals
        result.n_failures += nfail
    if len(methods) == 2:
        result.ks = {
            name: ks_distance(a, b)
            for name, a, b in zip(model.names, result.final["pce"], result.final["mc"])
        }
    return result


def one_at_a_time_study(config: StudyConfig, which_input: str) -> UqResult:
    """UQ with only ``which_input`` uncertain; the others sit at their
    nominal values (Gaussian mean, Uniform midpoint)."""
    names = [i.name for i in config.inputs]
    if which_input not in names:
        raise ValueError(f"unknown input {which_input!r}; configured inputs are {names}")
    inputs = []
    for inp in config.inputs:
        if inp.name == which_input:
            inputs.append(inp)
        else:
            inputs.append(UncertainInput(inp.name, Uniform(inp.distribution.nominal,
                                                            inp.distribution.nominal)))  # fmt: skip
    return run_uq_study(config.replace(inputs=tuple(inputs)))


# ---------------------------------------------------------------- chance


@dataclass(frozen=True)
class ChanceResult:
    """Probability that the constrained quantity is at or below its bound."""

    probability: float
    distribution: EmpiricalDistribution
    method: str
    decision: dict
    n_model_runs: int

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


def chance_probability(distribution: EmpiricalDistribution, threshold: float) -> float:
    """Empirical P(X <= threshold)."""
    return float(distribution.cdf(threshold))


class _ChanceEvaluator:
    """Evaluates P(c_w(t) <= target) at given (T_b, t) with fixed samples, so
    repeated evaluations are exactly reproducible."""

    def __init__(self, config: StudyConfig, method: str):
        if method not in ("pce", "mc"):
            raise ValueError(f"method must be 'pce' or 'mc', got {method!r}")
        self.config = config
        self.method = method
        self.active, self.params, self.conditions = _split_inputs(config)
        n = config.pce_samples if method == "pce" else config.mc_samples
        self.samples = draw_samples(self.active, n, config.seed) if self.active else None
        self._resample = None
        self.n_runs = 0

    def _resample_rows(self):
        if self._resample is None:
            self._resample = draw_block(self.active, self.config.resamples, self.config.seed)
        return self._resample

    def __call__(self, T_b: float, t: float) -> ChanceResult:
        cfg = self.config
        model = ConcentrationResponse(float(t), float(T_b), cfg.N)
        if not self.active:
            values = model(self.params, self.conditions)
            self.n_runs += 1
        else:
            ens = run_ensemble(model, self.active, 0, cfg.seed, self.params, self.conditions,
                               samples=self.samples, workers=cfg.workers)  # fmt: skip
            self.n_runs += len(self.samples)
            ok = ens.ok
            if self.method == "pce":
                sur = fit_surrogate(self.active, self.samples[ok], ens.outputs[ok], cfg.order)
                psi = evaluate_basis(sur, self._resample_rows())
                values = psi @ sur.coefficients[:, 0]
            else:
                values = ens.outputs[ok, 0]
        dist = EmpiricalDistribution.from_samples(values)
        return ChanceResult(
            probability=chance_probability(dist, cfg.concentration),
            distribution=dist,
            method=self.method,
            decision={"T_b": float(T_b), "t": float(t)},
            n_model_runs=self.n_runs,
        )


def _check_monotone(values, what, scan):
    drops = np.diff(values)
    if np.any(drops < -MONOTONE_SLACK):
        raise MonotonicityError(
            f"{what} is not monotone on the coarse scan (largest drop {-drops.min():.3g})",
            scan,
        )


@dataclass(frozen=True)
class DesignResult:
    T_b: float
    chance: ChanceResult
    scan: tuple  # ((T_b, P), ...) coarse scan followed by bisection points
    method: str

    def write(self, out_dir, config: StudyConfig, timing: float) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "scan.csv", ["T_b [K]", "probability [-]"], np.array(self.scan))
        write_csv(out / "cdf.csv", ["cw_mean [kg/kg]"], self.chance.distribution.samples[:, None])
        write_json(out / "summary.json", {
            "config": config.to_dict(),
            "T_b": self.T_b,
            "probability": self.chance.probability,
            "method": self.method,
            "n_model_runs": self.chance.n_model_runs,
        })  # fmt: skip
        write_json(out / "timings.json", {self.method: timing})


def design_min_shelf_temperature(config: StudyConfig, method: Optional[str] = None) -> DesignResult:
    """Lowest constant shelf temperature with
    P(c_w_mean(target_time) <= concentration) >= probability.

    A coarse scan over ``T_b_bounds`` checks the probability is non-decreasing
    in ``T_b``; the first bracketing interval is then bisected to
    ``SHELF_TOLERANCE``.  The returned temperature is the feasible end of the
    final bracket.
    """
    method = method or ("pce" if config.method == "both" else config.method)
    evaluate = _ChanceEvaluator(config, method)
    t = config.conditions.t_0 + config.target_time
    lo_b, hi_b = config.T_b_bounds
    temps = np.linspace(lo_b, hi_b, config.scan_points)
    results = [evaluate(T, t) for T in temps]
    probs = np.array([r.probability for r in results])
    scan = [(float(T), float(p)) for T, p in zip(temps, probs)]
    _check_monotone(probs, "P(c_w <= target) versus T_b", scan)
    target = config.probability
    if probs[0] >= target:
        return DesignResult(float(temps[0]), results[0], tuple(scan), method)
    if probs[-1] < target:
        raise InfeasibleError(
            f"P = {probs[-1]:.4f} at the upper bound T_b = {hi_b} K is below {target}",
            {"T_b": [lo_b, hi_b], "probability": [float(probs[0]), float(probs[-1])]},
        )
    k = int(np.argmax(probs >= target))
    a, b, best = temps[k - 1], temps[k], results[k]
    while b - a > SHELF_TOLERANCE:
        m = 0.5 * (a + b)
        r = evaluate(m, t)
        scan.append((float(m), r.probability))
        if r.probability >= target:
            b, best = m, r
        else:
            a = m
    return DesignResult(float(b), best, tuple(scan), method)


@dataclass(frozen=True)
class OptimizationResult:
    t_f: float
    T_b: float
    chance: ChanceResult
    scan: tuple  # ((T_b, P at t_f), ...)
    history: tuple  # ((t, P), ...) bisection on t
    method: str

    def write(self, out_dir, config: StudyConfig, timing: float) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "scan.csv", ["T_b [K]", "probability [-]"], np.array(self.scan))
        write_csv(out / "bisection.csv", ["t [s]", "probability [-]"], np.array(self.history))
        write_csv(out / "cdf.csv", ["cw_mean [kg/kg]"], self.chance.distribution.samples[:, None])
        write_json(out / "summary.json", {
            "config": config.to_dict(),
            "t_f": self.t_f,
            "t_f_hours": self.t_f / HOUR,
            "T_b": self.T_b,
            "probability": self.chance.probability,
            "method": self.method,
            "n_model_runs": self.chance.n_model_runs,
        })  # fmt: skip
        write_json(out / "timings.json", {self.method: timing})


def minimize_drying_time(config: StudyConfig, method: Optional[str] = None) -> OptimizationResult:
    """Shortest secondary drying time with
    P(c_w_mean(t_f) <= concentration) >= probability at constant ``T_b``.

    Takes ``T_b`` at its upper bound, bisects ``t`` on ``[t_0, t_end]`` to
    ``TIME_TOLERANCE`` and then verifies on a coarse ``T_b`` scan at the
    optimum that no lower shelf temperature reaches a higher probability.
    """
    method = method or ("pce" if config.method == "both" else config.method)
    evaluate = _ChanceEvaluator(config, method)
    T_b = config.T_b_bounds[1]
    t0, t1 = config.conditions.t_0, config.t_end
    target = config.probability
    start = evaluate(T_b, t0)
    history = [(t0, start.probability)]
    if start.probability >= target:
        best, a, b = start, t0, t0
    else:
        end = evaluate(T_b, t1)
        history.append((t1, end.probability))
        if end.probability < target:
            raise InfeasibleError(
                f"P = {end.probability:.4f} at the horizon t = {t1 / HOUR:.4g} h is below {target}",
                {"t": [t0, t1], "probability": [start.probability, end.probability], "T_b": T_b},
            )
        a, b, best = t0, t1, end
        while b - a > TIME_TOLERANCE:
            m = 0.5 * (a + b)
            r = evaluate(T_b, m)
            history.append((m, r.probability))
            if r.probability >= target:
                b, best = m, r
            else:
                a = m
    temps = np.linspace(*config.T_b_bounds, config.scan_points)
    probs = np.array([evaluate(T, b).probability for T in temps[:-1]] + [best.probability])
    scan = tuple((float(T), float(p)) for T, p in zip(temps, probs))
    _check_monotone(probs, "P(c_w(t_f) <= target) versus T_b", scan)
    return OptimizationResult(float(b), float(T_b), best, scan, tuple(history), method)


# ---------------------------------------------------------------- timing


def benchmark_methods(
    cases: Sequence[str] = ("A1", "A2", "B1", "B2"),
    reps: int = BENCHMARK_REPS,
    configs: Optional[dict] = None,
) -> list[dict]:
    """Wall-clock time of each case with PCE and with MC.

    Returns one row per case: ``{"case", "pce_mean", "pce_std", "mc_mean",
    "mc_std", "reps"}`` (seconds; standard deviation over ``reps`` runs).
    ``configs`` may map a case name to its :class:`StudyConfig`.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    configs = configs or {}
    rows = []
    for case in cases:
        cfg = configs.get(case) or case_config(case)
        times = {"pce": [], "mc": []}
        for method in ("pce", "mc"):
            for _ in range(reps):
                t0 = time.perf_counter()
                if case.upper() in ("A1", "A2"):
                    run_uq_study(cfg.replace(method=method))
                elif case.upper() == "B1":
                    design_min_shelf_temperature(cfg, method)
                else:
                    minimize_drying_time(cfg, method)
                times[method].append(time.perf_counter() - t0)
            log.info("%s %s: %.3f s", case, method, np.mean(times[method]))
        rows.append({
            "case": case,
            "pce_mean": float(np.mean(times["pce"])),
            "pce_std": float(np.std(times["pce"], ddof=1)) if reps > 1 else 0.0,
            "mc_mean": float(np.mean(times["mc"])),
            "mc_std": float(np.std(times["mc"], ddof=1)) if reps > 1 else 0.0,
            "reps": reps,
        })  # fmt: skip
    return rows
