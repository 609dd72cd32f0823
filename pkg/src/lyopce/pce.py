"""Non-intrusive polynomial chaos expansions.

Each input is standardized onto the support of its orthogonal family
(Uniform -> Legendre on [-1, 1], Gaussian -> probabilists' Hermite,
Beta -> Jacobi on [-1, 1], Gamma -> generalized Laguerre on (0, inf)), the
multivariate basis is the total-order tensor product, and the coefficients
are fitted by least squares on model responses.

Squared norms are taken under the *probability* measure of each input, so
``psi_0 = 1`` has norm 1 and the variance of the expansion is
``sum_{i >= 1} y_i^2 <psi_i^2>``.  For Legendre this is the textbook
``2 / (2n + 1)`` divided by the interval length 2.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass
from math import comb, lgamma
from typing import Callable, Optional, Sequence

import numpy as np

from .distributions import (
    Beta,
    Gamma,
    Gaussian,
    UncertainInput,
    Uniform,
    distribution_from_dict,
    distribution_to_dict,
    draw_block,
)
from .stats import EmpiricalDistribution

__all__ = [
    "FitError",
    "MultiIndexSet",
    "PceSurrogate",
    "univariate_polynomial",
    "multi_index_set",
    "evaluate_basis",
    "fit_surrogate",
    "evaluate_surrogate",
    "surrogate_moments",
    "surrogate_distribution",
    "DEFAULT_ORDER",
    "DEFAULT_PCE_SAMPLES",
    "DEFAULT_RESAMPLES",
    "MAX_CONDITION",
]

DEFAULT_ORDER = 2
DEFAULT_PCE_SAMPLES = 50
DEFAULT_RESAMPLES = 100_000
MAX_CONDITION = 1e10
FORMAT_VERSION = 1


class FitError(RuntimeError):
    """Least-squares design unusable (too few samples or rank deficient)."""


# -- univariate families ------------------------------------------------------


def _legendre(n, x):
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = x.copy()
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    return p1


def _hermite_e(n, x):
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = x.copy()
    for k in range(1, n):
        p0, p1 = p1, x * p1 - k * p0
    return p1


def _jacobi(n, x, a, b):
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = (a + 1) + (a + b + 2) * (x - 1) / 2
    for k in range(1, n):
        s = 2 * k + a + b
        c1 = 2 * (k + 1) * (k + a + b + 1) * s
        c2 = (s + 1) * (a * a - b * b)
        c3 = s * (s + 1) * (s + 2)
        c4 = 2 * (k + a) * (k + b) * (s + 2)
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
    return p1


def _laguerre(n, x, alpha):
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = 1 + alpha - x
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1 + alpha - x) * p1 - (k + alpha) * p0) / (k + 1)
    return p1


def _jacobi_norm(n, a, b):
    # ratio h_n / h_0 of the classical Jacobi norms under (1-x)^a (1+x)^b
    if n == 0:
        return 1.0
    log_hn = (
        -math.log(2 * n + a + b + 1)
        + lgamma(n + a + 1)
        + lgamma(n + b + 1)
        - lgamma(n + a + b + 1)
        - lgamma(n + 1)
    )
    log_h0 = lgamma(a + 1) + lgamma(b + 1) - lgamma(a + b + 2)
    return math.exp(log_hn - log_h0)


def univariate_polynomial(dist, order: int) -> tuple[Callable, float]:
    """Orthogonal polynomial of ``order`` matched to ``dist`` and its squared
    norm under the standardized probability measure.

    The returned callable takes the *standardized* variable.
    """
    n = int(order)
    if n < 0 or n != order:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    if isinstance(dist, Uniform):
        return (lambda x: _legendre(n, np.asarray(x, float))), 1.0 / (2 * n + 1)
    if isinstance(dist, Gaussian):
        return (lambda x: _hermite_e(n, np.asarray(x, float))), float(math.factorial(n))
    if isinstance(dist, Beta):
        a, b = dist.beta - 1.0, dist.alpha - 1.0
        return (lambda x: _jacobi(n, np.asarray(x, float), a, b)), _jacobi_norm(n, a, b)
    if isinstance(dist, Gamma):
        al = dist.shape - 1.0
        norm = math.exp(lgamma(n + al + 1) - lgamma(n + 1) - lgamma(al + 1))
        return (lambda x: _laguerre(n, np.asarray(x, float), al)), norm
    raise TypeError(f"no orthogonal family for {type(dist).__name__}")


# -- multi-indices ------------------------------------------------------------


@dataclass(frozen=True)
class MultiIndexSet:
    n_inputs: int
    order: int
    indices: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(len(self), self.n_inputs)


def multi_index_set(n_inputs: int, order: int) -> MultiIndexSet:
    """All exponent tuples with total degree <= ``order``, graded, and within
    each degree in descending lexicographic order (``(1,0) < (0,1)``)."""
    if n_inputs < 1 or order < 0:
        raise ValueError("need n_inputs >= 1 and order >= 0")
    out = []
    for deg in range(order + 1):
        level = [nu for nu in itertools.product(range(deg + 1), repeat=n_inputs)
                 if sum(nu) == deg]  # fmt: skip
        out.extend(sorted(level, reverse=True))
    assert len(out) == comb(n_inputs + order, order)
    return MultiIndexSet(n_inputs, order, tuple(out))


# -- surrogate ----------------------------------------------------------------


@dataclass(frozen=True)
class PceSurrogate:
    """Fitted expansion.  ``coefficients`` has one row per basis function and
    one column per output quantity (e.g. per output time node)."""

    inputs: tuple[UncertainInput, ...]
    index_set: MultiIndexSet
    coefficients: np.ndarray
    norms: np.ndarray
    output_names: Optional[tuple[str, ...]] = None

    @property
    def n_outputs(self) -> int:
        return self.coefficients.shape[1]

    def to_json(self) -> str:
        payload = {
            "format": "lyopce-surrogate",
            "version": FORMAT_VERSION,
            "inputs": [
                {"name": i.name, "distribution": distribution_to_dict(i.distribution)}
                for i in self.inputs
            ],
            "order": self.index_set.order,
            "indices": [list(nu) for nu in self.index_set.indices],
            "norms": [float(v) for v in self.norms],
            "coefficients": [[float(v) for v in row] for row in self.coefficients],
            "output_names": list(self.output_names) if self.output_names else None,
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PceSurrogate":
        data = json.loads(text)
        if data.get("format") != "lyopce-surrogate":
            raise ValueError("not a surrogate document")
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported surrogate version {data.get('version')!r}")
        inputs = tuple(
            UncertainInput(d["name"], distribution_from_dict(d["distribution"]))
            for d in data["inputs"]
        )
        idx = MultiIndexSet(
            len(inputs), int(data["order"]), tuple(tuple(nu) for nu in data["indices"])
        )
        names = data.get("output_names")
        return cls(
            inputs=inputs,
            index_set=idx,
            coefficients=np.array(data["coefficients"], dtype=float),
            norms=np.array(data["norms"], dtype=float),
            output_names=tuple(names) if names else None,
        )


def _basis_matrix(dists, index_set: MultiIndexSet, theta) -> np.ndarray:
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.shape[1] != len(dists):
        raise ValueError(f"expected {len(dists)} columns, got {theta.shape[1]}")
    for j, dist in enumerate(dists):
        if not np.all(dist.in_support(theta[:, j])):
            raise ValueError(f"input {j} outside the support of {dist!r}")
    order = index_set.order
    # tables[j][k] = phi_k(xi_j) for all rows
    tables = []
    for j, dist in enumerate(dists):
        xi = dist.standardize(theta[:, j])
        tables.append([univariate_polynomial(dist, k)[0](xi) for k in range(order + 1)])
    psi = np.ones((theta.shape[0], len(index_set)))
    for i, nu in enumerate(index_set.indices):
        for j, k in enumerate(nu):
            if k:
                psi[:, i] *= tables[j][k]
    return psi


def _norms(dists, index_set: MultiIndexSet) -> np.ndarray:
    out = np.ones(len(index_set))
    for i, nu in enumerate(index_set.indices):
        for dist, k in zip(dists, nu):
            out[i] *= univariate_polynomial(dist, k)[1]
    return out


def evaluate_basis(surrogate: PceSurrogate, theta) -> np.ndarray:
    """Basis values ``psi_i(theta)``: an L-vector for one raw input vector,
    or an ``n x L`` matrix for ``n`` rows."""
    dists = [i.distribution for i in surrogate.inputs]
    psi = _basis_matrix(dists, surrogate.index_set, theta)
    return psi[0] if np.ndim(theta) == 1 else psi


def fit_surrogate(
    inputs: Sequence[UncertainInput],
    samples,
    responses,
    order: int = DEFAULT_ORDER,
    output_names=None,
) -> PceSurrogate:
    """Least-squares fit of the total-order expansion to ``responses``
    (``n x m``) observed at the raw input rows ``samples`` (``n x N_theta``)."""
    inputs = tuple(inputs)
    if any(i.distribution.degenerate for i in inputs):
        raise FitError("degenerate (zero-width) inputs cannot enter the basis")
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    Y = np.asarray(responses, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] != Y.shape[0]:
        raise ValueError("samples and responses have different row counts")
    if not np.all(np.isfinite(Y)):
        raise FitError("non-finite responses")
    idx = multi_index_set(len(inputs), order)
    L = len(idx)
    n = X.shape[0]
    if n < L:
        raise FitError(f"{n} samples cannot determine {L} coefficients")
    if n < 2 * L:
        warnings.warn(f"only {n} samples for {L} coefficients; 2L or more advised")
    dists = [i.distribution for i in inputs]
    psi = _basis_matrix(dists, idx, X)
    scale = np.linalg.norm(psi, axis=0)
    scaled = psi / scale
    sv = np.linalg.svd(scaled, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if cond > MAX_CONDITION:
        raise FitError(
            f"design matrix condition number {cond:.3g}; use more samples or a lower order"
        )
    coef, *_ = np.linalg.lstsq(scaled, Y, rcond=None)
    coef = coef / scale[:, None]
    return PceSurrogate(
        inputs=inputs,
        index_set=idx,
        coefficients=coef,
        norms=_norms(dists, idx),
        output_names=tuple(output_names) if output_names is not None else None,
    )


def evaluate_surrogate(surrogate: PceSurrogate, theta) -> np.ndarray:
    """Outputs at one raw input vector (m-vector) or at ``n`` rows (n x m)."""
    psi = evaluate_basis(surrogate, theta)
    return psi @ surrogate.coefficients


def surrogate_moments(surrogate: PceSurrogate) -> tuple[np.ndarray, np.ndarray]:
    """Mean ``y_0`` and variance ``sum_{i>=1} y_i^2 <psi_i^2>`` per output."""
    c = surrogate.coefficients
    mean = c[0].copy()
    var = np.einsum("i,ij->j", surrogate.norms[1:], c[1:] ** 2)
    return mean, var


def surrogate_distribution(
    surrogate: PceSurrogate,
    n_resample: int = DEFAULT_RESAMPLES,
    seed: int = 0,
    samples=None,
) -> list[EmpiricalDistribution]:
    """Empirical distribution of each output over fresh input draws.

    Inputs come from the block stream of ``seed`` (disjoint from the per-row
    stream the fitting samples are drawn from).  ``samples`` may pass
    pre-drawn input rows instead.
    """
    if samples is None:
        if n_resample < 1000:
            raise ValueError("need at least 1000 resamples")
        samples = draw_block(surrogate.inputs, n_resample, seed)
    values = evaluate_surrogate(surrogate, samples)
    values = np.atleast_2d(values)
    return [EmpiricalDistribution.from_samples(values[:, j]) for j in range(values.shape[1])]
