"""Monte Carlo reference path: run the full model on every sample."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .distributions import UncertainInput, apply_values, draw_samples
from .physics import ModelParameters, ProcessConditions
from .stats import EmpiricalDistribution, ks_distance

__all__ = [
    "Ensemble",
    "EnsembleStatistics",
    "EnsembleError",
    "run_ensemble",
    "ensemble_statistics",
    "compare_distributions",
    "DEFAULT_MC_SAMPLES",
    "MAX_FAILURE_FRACTION",
]

log = logging.getLogger(__name__)

DEFAULT_MC_SAMPLES = 2000
MAX_FAILURE_FRACTION = 0.01

Model = Callable[[ModelParameters, ProcessConditions], np.ndarray]


class EnsembleError(RuntimeError):
    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures


@dataclass(frozen=True)
class Ensemble:
    """Sample matrix and per-sample outputs; failed rows hold NaN outputs and
    are listed in ``failures`` as ``(index, message)``."""

    samples: np.ndarray
    outputs: np.ndarray
    seed: int
    duration: float
    failures: tuple = ()
    output_names: Optional[tuple] = None

    @property
    def ok(self) -> np.ndarray:
        return np.all(np.isfinite(self.outputs), axis=1)


@dataclass(frozen=True)
class EnsembleStatistics:
    mean: np.ndarray
    variance: np.ndarray
    distributions: list = field(repr=False)


def _evaluate(model, params, conditions, inputs, row):
    p, c = apply_values(params, conditions, inputs, row)
    return np.asarray(model(p, c), dtype=np.float64).ravel()


def _evaluate_chunk(args):
    model, params, conditions, inputs, rows, first = args
    out = []
    for k, row in enumerate(rows):
        try:
            out.append((first + k, _evaluate(model, params, conditions, inputs, row), None))
        except Exception as exc:  # recorded per sample, judged below
            out.append((first + k, None, f"{type(exc).__name__}: {exc}"))
    return out


def run_ensemble(
    model: Model,
    inputs: Sequence[UncertainInput],
    n: int,
    seed: int,
    params: ModelParameters,
    conditions: ProcessConditions,
    start: int = 0,
    samples=None,
    workers: int = 1,
    max_failure_fraction: float = MAX_FAILURE_FRACTION,
    output_names=None,
) -> Ensemble:
    """Evaluate ``model(params, conditions)`` with the named inputs patched
    from each of ``n`` seeded sample rows.

    Rows are ``start .. start + n - 1`` of the stream for ``seed``; pass
    ``samples`` to reuse an already drawn matrix.  With ``workers > 1`` the
    rows are split into contiguous chunks for a process pool; results are
    reassembled in row order, so the ensemble does not depend on ``workers``.
    """
    inputs = tuple(inputs)
    if samples is None:
        samples = draw_samples(inputs, n, seed, start=start)
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = samples.shape[0]
    t0 = time.perf_counter()
    if workers <= 1:
        results = _evaluate_chunk((model, params, conditions, inputs, samples, 0))
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        jobs = [
            (model, params, conditions, inputs, samples[a:b], a)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_evaluate_chunk, jobs) for r in chunk]
    duration = time.perf_counter() - t0

    width = next((len(v) for _, v, _ in results if v is not None), None)
    failures = tuple((i, msg) for i, _, msg in results if msg is not None)
    if width is None:
        raise EnsembleError("every sample failed", failures)
    outputs = np.full((n, width), np.nan)
    for i, v, _ in results:
        if v is not None:
            outputs[i] = v
    if failures:
        log.warning("%d of %d samples failed; first: %s", len(failures), n, failures[0])
    if len(failures) > max_failure_fraction * n:
        raise EnsembleError(
            f"{len(failures)} of {n} samples failed (limit {max_failure_fraction:.0%})",
            failures,
        )
    return Ensemble(
        samples=samples,
        outputs=outputs,
        seed=int(seed),
        duration=duration,
        failures=failures,
        output_names=tuple(output_names) if output_names is not None else None,
    )


def ensemble_statistics(ensemble: Ensemble) -> EnsembleStatistics:
    """Column-wise mean, variance and empirical distribution over the
    successful samples."""
    good = ensemble.outputs[ensemble.ok]
    if good.shape[0] == 0:
        raise ValueError("ensemble has no successful samples")
    dists = [EmpiricalDistribution.from_samples(good[:, j]) for j in range(good.shape[1])]
    # statistics from the sorted samples so row order cannot change them
    mean = np.array([d.mean for d in dists])
    var = np.array([d.variance for d in dists])
    return EnsembleStatistics(mean=mean, variance=var, distributions=dists)


def compare_distributions(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Kolmogorov-Smirnov distance between two empirical distributions."""
    return ks_distance(a, b)
