"""Command-line entry point.

Usage::

    lyopce <subcommand> [--config FILE] [--params FILE] [--conditions FILE]
                        [--out DIR] [--seed N] [--method pce|mc|both]
                        [--samples N] [--order N] [-v]

The optional YAML config holds any of the keys in ``_STUDY_KEYS`` and
``_RUN_KEYS``; flags override it and unknown keys are rejected.  Data files
are byte-reproducible for a given config and seed; wall-clock timings go to
``timings.json`` only.

Exit codes: 0 ok, 2 configuration, 3 simulation, 4 surrogate fit,
5 infeasible target.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .distributions import UncertainInput, distribution_from_dict
from .integrator import IntegrationError
from .montecarlo import EnsembleError
from .pce import FitError
from .physics import (
    default_conditions,
    default_parameters,
    load_conditions,
    load_parameters,
)
from .primary import SimulationError, simulate_primary
from .secondary import secondary_drying_time, simulate_secondary
from .studies import (
    HOUR,
    InfeasibleError,
    MonotonicityError,
    StudyConfig,
    benchmark_methods,
    case_config,
    design_min_shelf_temperature,
    minimize_drying_time,
    one_at_a_time_study,
    run_uq_study,
)
from .util import write_csv, write_json

log = logging.getLogger("lyopce")

EXIT_OK, EXIT_CONFIG, EXIT_SIMULATION, EXIT_FIT, EXIT_INFEASIBLE = 0, 2, 3, 4, 5

SUBCOMMANDS = (
    "simulate-primary",
    "simulate-secondary",
    "uq",
    "oat",
    "design",
    "optimize",
    "benchmark",
)

_STUDY_KEYS = {
    "method", "pce_samples", "mc_samples", "resamples", "band_resamples", "order",
    "n_times", "t_end", "N", "level", "target_time", "probability", "concentration",
    "T_b_bounds", "scan_points", "workers", "inputs",
}  # fmt: skip
_RUN_KEYS = {
    "case", "params", "conditions", "out", "seed", "verbosity", "n_out", "rtol",
    "atol", "input", "cases", "reps", "chain_from_primary", "primary_conditions",
    "primary_t_end",
}  # fmt: skip

_DEFAULT_CASE = {"uq": "A1", "oat": "A2", "design": "B1", "optimize": "B2"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Resolved command: subcommand, file paths, study payload and options."""

    subcommand: str
    out: Path
    params_path: Optional[str] = None
    conditions_path: Optional[str] = None
    seed: int = 0
    verbosity: int = 0
    case: Optional[str] = None
    study: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Config as recorded in summaries.  The output directory and the
        verbosity are left out: neither changes the data."""
        out = asdict(self)
        out.pop("out")
        out.pop("verbosity")
        return out


def _load_document(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"{path}: malformed YAML{where}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a key/value document")
    return data


def parse_config(subcommand: str, config_path=None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge the config file (if any) with flag ``overrides``.

    ``None`` override values are ignored.  ``samples`` sets the sample count
    of the selected method and is rejected with ``method: both``.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    doc = _load_document(config_path) if config_path else {}
    unknown = sorted(set(doc) - _STUDY_KEYS - _RUN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    merged = dict(doc)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    samples = overrides.pop("samples", None)
    merged.update(overrides)
    if samples is not None:
        method = merged.get("method", "pce" if subcommand in ("design", "optimize") else "both")
        if method == "both":
            raise ConfigError("--samples needs --method pce or mc; set pce_samples/mc_samples instead")
        merged["pce_samples" if method == "pce" else "mc_samples"] = int(samples)

    for key in ("params", "conditions", "primary_conditions"):
        if key in merged and not Path(merged[key]).is_file():
            raise ConfigError(f"{key} file not found: {merged[key]}")
    seed = merged.pop("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    study = {k: merged.pop(k) for k in list(merged) if k in _STUDY_KEYS}
    if "T_b_bounds" in study:
        study["T_b_bounds"] = list(study["T_b_bounds"])
    case = merged.pop("case", _DEFAULT_CASE.get(subcommand))
    return RunConfig(
        subcommand=subcommand,
        out=Path(merged.pop("out", "results")),
        params_path=merged.pop("params", None),
        conditions_path=merged.pop("conditions", None),
        seed=seed,
        verbosity=int(merged.pop("verbosity", 0)),
        case=case.upper() if isinstance(case, str) else case,
        study=study,
        options=merged,
    )


# ---------------------------------------------------------------- dispatch


def _params(cfg: RunConfig):
    return load_parameters(cfg.params_path) if cfg.params_path else default_parameters()


def _conditions(cfg: RunConfig, step: str):
    if cfg.conditions_path:
        return load_conditions(cfg.conditions_path)
    return default_conditions(step)


def _study_config(cfg: RunConfig) -> StudyConfig:
    payload = dict(cfg.study)
    if "inputs" in payload:
        try:
            payload["inputs"] = tuple(
                UncertainInput(d["name"], distribution_from_dict(d["distribution"]))
                for d in payload["inputs"]
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed inputs entry: {exc}") from None
    if "T_b_bounds" in payload:
        payload["T_b_bounds"] = tuple(payload["T_b_bounds"])
    base = case_config(cfg.case)
    payload["params"] = _params(cfg)
    payload["conditions"] = _conditions(cfg, base.model)
    payload.setdefault("t_end", base.t_end - base.conditions.t_0 + payload["conditions"].t_0)
    return base.replace(seed=cfg.seed, **payload)


def _time_grid(t0, t_end, n_out):
    return np.linspace(t0, t_end, int(n_out))


def _sim_options(cfg: RunConfig, default_t_end):
    opts = cfg.options
    kw = {}
    for key in ("rtol", "atol"):
        if key in opts:
            kw[key] = float(opts[key])
    if "N" in cfg.study:
        kw["N"] = int(cfg.study["N"])
    t_end = float(cfg.study.get("t_end", default_t_end))
    return t_end, int(opts.get("n_out", 201)), kw


def _run_simulate_primary(cfg: RunConfig) -> dict:
    params = _params(cfg)
    cond = _conditions(cfg, "primary")
    t_end, n_out, kw = _sim_options(cfg, cond.t_0 + 2.0 * HOUR)
    tr = simulate_primary(params, cond, t_end=t_end,
                          output_grid=_time_grid(cond.t_0, t_end, n_out), **kw)  # fmt: skip
    tr.to_csv(cfg.out / "trajectory.csv")
    tr.field_to_csv(cfg.out / "field.csv")
    return {
        "params": asdict(params),
        "conditions": asdict(cond),
        "drying_time": tr.drying_time,
        "final": {"t": tr.t[-1], "S": tr.S[-1], "T_interface": tr.T_interface[-1],
                  "T_bottom": tr.T_bottom[-1], "T_mean": tr.T_mean[-1]},  # fmt: skip
    }


def _run_simulate_secondary(cfg: RunConfig) -> dict:
    params = _params(cfg)
    cond = _conditions(cfg, "secondary")
    summary = {}
    if cfg.options.get("chain_from_primary"):
        pc_path = cfg.options.get("primary_conditions")
        pcond = load_conditions(pc_path) if pc_path else default_conditions("primary")
        p_end = pcond.t_0 + float(cfg.options.get("primary_t_end", 24.0 * HOUR))
        ptr = simulate_primary(params, pcond, t_end=p_end)
        cond = cond.replace(T_0=float(ptr.T_mean[-1]))
        summary["primary"] = {"drying_time": ptr.drying_time, "T_0": cond.T_0}
    t_end, n_out, kw = _sim_options(cfg, cond.t_0 + 10.0 * HOUR)
    tr = simulate_secondary(params, cond, t_end=t_end,
                            output_grid=_time_grid(cond.t_0, t_end, n_out), **kw)  # fmt: skip
    tr.to_csv(cfg.out / "trajectory.csv")
    tr.field_to_csv(cfg.out / "field.csv")
    target = float(cfg.study.get("concentration", 0.01))
    summary.update({
        "params": asdict(params),
        "conditions": asdict(cond),
        "concentration_target": target,
        "drying_time": secondary_drying_time(tr, target),
        "final": {"t": tr.t[-1], "cw_mean": tr.cw_mean[-1], "T_mean": tr.T_mean[-1]},
    })  # fmt: skip
    return summary


def _run_uq(cfg: RunConfig) -> dict:
    study = _study_config(cfg)
    t0 = time.perf_counter()
    result = run_uq_study(study)
    result.write(cfg.out)
    return {"_timing": time.perf_counter() - t0, "ks": result.ks}


def _run_oat(cfg: RunConfig) -> dict:
    study = _study_config(cfg)
    names = [i.name for i in study.inputs]
    which = cfg.options.get("input")
    targets = [which] if which else names
    if which and which not in names:
        raise ConfigError(f"unknown input {which!r}; configured inputs are {names}")
    out = {}
    for name in targets:
        res = one_at_a_time_study(study, name)
        res.write(cfg.out / name)
        out[name] = {m: {s.name: [s.lo[-1], s.hi[-1]] for s in series}
                     for m, series in res.series.items()}  # fmt: skip
    return {"final_ci": out}


def _run_design(cfg: RunConfig) -> dict:
    study = _study_config(cfg)
    t0 = time.perf_counter()
    res = design_min_shelf_temperature(study)
    res.write(cfg.out, study, time.perf_counter() - t0)
    return {"T_b": res.T_b, "probability": res.chance.probability}


def _run_optimize(cfg: RunConfig) -> dict:
    study = _study_config(cfg)
    t0 = time.perf_counter()
    res = minimize_drying_time(study)
    res.write(cfg.out, study, time.perf_counter() - t0)
    return {"t_f_hours": res.t_f / HOUR, "T_b": res.T_b, "probability": res.chance.probability}


def _run_benchmark(cfg: RunConfig) -> dict:
    cases = [c.upper() for c in cfg.options.get("cases", ["A1", "A2", "B1", "B2"])]
    reps = int(cfg.options.get("reps", 10))
    configs = {}
    for case in cases:
        configs[case] = _study_config(RunConfig(
            subcommand=cfg.subcommand, out=cfg.out, params_path=cfg.params_path,
            conditions_path=cfg.conditions_path, seed=cfg.seed, case=case, study=cfg.study,
        ))  # fmt: skip
    rows = benchmark_methods(cases, reps, configs)
    # timing is the payload here, so the table lives beside timings.json
    write_csv(
        cfg.out / "benchmark.csv",
        ["case", "pce_mean [s]", "pce_std [s]", "mc_mean [s]", "mc_std [s]", "speedup [-]"],
        [[r["case"], r["pce_mean"], r["pce_std"], r["mc_mean"], r["mc_std"],
          r["mc_mean"] / r["pce_mean"]] for r in rows],  # fmt: skip
    )
    return {"_timing": rows, "reps": reps, "cases": cases}


_HANDLERS = {
    "simulate-primary": _run_simulate_primary,
    "simulate-secondary": _run_simulate_secondary,
    "uq": _run_uq,
    "oat": _run_oat,
    "design": _run_design,
    "optimize": _run_optimize,
    "benchmark": _run_benchmark,
}


def dispatch(cfg: RunConfig) -> int:
    """Run ``cfg`` and write its artifacts; returns the exit status."""
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("config: cannot create output directory %s: %s", cfg.out, exc)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        summary = _HANDLERS[cfg.subcommand](cfg)
    except InfeasibleError as exc:
        write_json(cfg.out / "infeasible.json", {"config": cfg.echo(), "message": str(exc),
                                                 "report": exc.report})  # fmt: skip
        log.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except FitError as exc:
        log.error("fit: %s", exc)
        return EXIT_FIT
    except (SimulationError, IntegrationError, EnsembleError, MonotonicityError) as exc:
        log.error("simulation: %s", exc)
        return EXIT_SIMULATION
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        log.error("config: %s", exc)
        return EXIT_CONFIG
    timing = summary.pop("_timing", None)
    elapsed = time.perf_counter() - t0
    if cfg.subcommand.startswith("simulate") or cfg.subcommand in ("oat", "benchmark"):
        write_json(cfg.out / "summary.json", {"config": cfg.echo(), **summary})
        write_json(cfg.out / "timings.json", {"total": elapsed, "detail": timing})
    else:
        # studies write their own summary; add the run-level echo beside it
        write_json(cfg.out / "run.json", {"config": cfg.echo(), **summary})
    log.info("done in %.2f s, results in %s", elapsed, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyopce",
        description="Freeze-drying simulation with PCE and Monte Carlo uncertainty studies.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--params", help="model parameter file (YAML)")
    parser.add_argument("--conditions", help="process conditions file (YAML)")
    parser.add_argument("--out", help="output directory (default: results)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--method", choices=("pce", "mc", "both"))
    parser.add_argument("--samples", type=int, help="sample count of the chosen method")
    parser.add_argument("--order", type=int, help="total polynomial order")
    parser.add_argument("--case", choices=("A1", "A2", "B1", "B2"), help="case preset")
    parser.add_argument("--input", help="oat: the single uncertain input (default: each)")
    parser.add_argument("--cases", nargs="+", help="benchmark: cases to time")
    parser.add_argument("--reps", type=int, help="benchmark: repetitions per case")
    parser.add_argument("-v", "--verbose", action="count", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "params": args.params, "conditions": args.conditions, "out": args.out,
        "seed": args.seed, "method": args.method, "samples": args.samples,
        "order": args.order, "case": args.case, "input": args.input,
        "cases": args.cases, "reps": args.reps, "verbosity": args.verbose,
    }  # fmt: skip
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=logging.WARNING)
    try:
        cfg = parse_config(args.subcommand, args.config, overrides)
    except ConfigError as exc:
        log.error("config: %s", exc)
        return EXIT_CONFIG
    if cfg.verbosity:
        logging.getLogger().setLevel(logging.INFO if cfg.verbosity == 1 else logging.DEBUG)
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
