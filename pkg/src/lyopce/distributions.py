"""Input distributions, named uncertain inputs and seeded sampling.

Every sample row ``i`` is drawn from its own generator seeded by
``SeedSequence(seed, spawn_key=(i,))``, so any subset of rows can be
regenerated on its own and the matrix does not depend on how the rows are
split across workers.  Large surrogate resamples use :func:`draw_block`
instead: one generator on a separate key, drawn column by column, which is
two orders of magnitude faster than per-row seeding.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence, Union

import numpy as np

from .physics import ModelParameters, ProcessConditions

__all__ = [
    "Uniform",
    "Gaussian",
    "Beta",
    "Gamma",
    "Distribution",
    "UncertainInput",
    "draw_samples",
    "draw_block",
    "row_generator",
    "resolve_name",
    "apply_values",
    "distribution_from_dict",
    "distribution_to_dict",
]


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"Uniform needs a <= b, got [{self.a}, {self.b}]")

    family = "legendre"

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    @property
    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def variance(self) -> float:
        return (self.b - self.a) ** 2 / 12.0

    nominal = mean

    def standardize(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - self.a) / (self.b - self.a) - 1.0

    def in_support(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.a) & (x <= self.b)

    def draw(self, g: np.random.Generator, size=None):
        return g.uniform(self.a, self.b, size)


@dataclass(frozen=True)
class Gaussian:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"Gaussian needs sigma >= 0, got {self.sigma}")

    family = "hermite"

    @property
    def degenerate(self) -> bool:
        return self.sigma == 0

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.sigma**2

    nominal = mean

    def standardize(self, x):
        return (np.asarray(x, dtype=float) - self.mu) / self.sigma

    def in_support(self, x):
        return np.isfinite(np.asarray(x, dtype=float))

    def draw(self, g: np.random.Generator, size=None):
        return g.normal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class Beta:
    """Beta(alpha, beta) stretched onto ``[a, b]``."""

    alpha: float
    beta: float
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta needs alpha, beta > 0")
        if not self.a < self.b:
            raise ValueError(f"Beta needs a < b, got [{self.a}, {self.b}]")

    family = "jacobi"
    degenerate = False

    @property
    def mean(self) -> float:
        return self.a + (self.b - self.a) * self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        s = self.alpha + self.beta
        return (self.b - self.a) ** 2 * self.alpha * self.beta / (s * s * (s + 1))

    nominal = mean

    def standardize(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - self.a) / (self.b - self.a) - 1.0

    def in_support(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.a) & (x <= self.b)

    def draw(self, g: np.random.Generator, size=None):
        return self.a + (self.b - self.a) * g.beta(self.alpha, self.beta, size)


@dataclass(frozen=True)
class Gamma:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("Gamma needs shape, rate > 0")

    family = "laguerre"
    degenerate = False

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2

    nominal = mean

    def standardize(self, x):
        return self.rate * np.asarray(x, dtype=float)

    def in_support(self, x):
        x = np.asarray(x, dtype=float)
        return x > 0

    def draw(self, g: np.random.Generator, size=None):
        return g.gamma(self.shape, 1.0 / self.rate, size)


Distribution = Union[Uniform, Gaussian, Beta, Gamma]

_KINDS = {"uniform": Uniform, "gaussian": Gaussian, "beta": Beta, "gamma": Gamma}


def distribution_to_dict(dist: Distribution) -> dict:
    out = {"kind": type(dist).__name__.lower()}
    out.update({f.name: getattr(dist, f.name) for f in fields(dist)})
    return out


def distribution_from_dict(data: dict) -> Distribution:
    data = dict(data)
    kind = str(data.pop("kind", "")).lower()
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    return _KINDS[kind](**{k: float(v) for k, v in data.items()})


_PARAM_FIELDS = {f.name for f in fields(ModelParameters)}
_COND_FIELDS = {f.name for f in fields(ProcessConditions)}


def resolve_name(name: str) -> tuple[str, str]:
    """Map ``'h'``, ``'params.h'`` or ``'conditions.cw_0'`` to
    ``(group, field)``."""
    if "." in name:
        group, fld = name.split(".", 1)
        table = {"params": _PARAM_FIELDS, "conditions": _COND_FIELDS}.get(group)
        if table is None or fld not in table:
            raise ValueError(f"{name!r} does not name a parameter field")
        return group, fld
    hits = [g for g, t in (("params", _PARAM_FIELDS), ("conditions", _COND_FIELDS))
            if name in t]  # fmt: skip
    if len(hits) != 1:
        raise ValueError(f"{name!r} does not resolve to exactly one parameter field")
    return hits[0], name


@dataclass(frozen=True)
class UncertainInput:
    name: str
    distribution: Distribution

    def __post_init__(self):
        resolve_name(self.name)

    @property
    def field(self) -> str:
        return resolve_name(self.name)[1]


def apply_values(
    params: ModelParameters,
    conditions: ProcessConditions,
    inputs: Sequence[UncertainInput],
    values,
) -> tuple[ModelParameters, ProcessConditions]:
    """Patch the named fields with one sample row."""
    p_changes, c_changes = {}, {}
    for inp, v in zip(inputs, np.atleast_1d(values)):
        group, fld = resolve_name(inp.name)
        (p_changes if group == "params" else c_changes)[fld] = float(v)
    return params.replace(**p_changes), conditions.replace(**c_changes)


def row_generator(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(i),)))


def draw_samples(
    inputs: Sequence[UncertainInput], n: int, seed: int, start: int = 0
) -> np.ndarray:
    """``n x len(inputs)`` matrix of rows ``start .. start + n - 1``."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    dists = [inp.distribution if hasattr(inp, "distribution") else inp for inp in inputs]
    out = np.empty((int(n), len(dists)))
    for r in range(int(n)):
        g = row_generator(seed, start + r)
        for j, dist in enumerate(dists):
            out[r, j] = dist.draw(g)
    return out



_BLOCK_KEY = (0x52455341, 0)


def draw_block(inputs: Sequence[UncertainInput], n: int, seed: int) -> np.ndarray:
    """``n x len(inputs)`` matrix from the block stream of ``seed``.

    The stream never overlaps the per-row stream used by :func:`draw_samples`.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    dists = [inp.distribution if hasattr(inp, "distribution") else inp for inp in inputs]
    g = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=_BLOCK_KEY))
    out = np.empty((int(n), len(dists)))
    for j, dist in enumerate(dists):
        out[:, j] = dist.draw(g, int(n))
    return out
