"""Model parameters, process conditions and the pointwise closures shared by
the primary- and secondary-drying models.

All quantities are SI, bound water in kg water per kg solid (wt/wt).

Cake resistance convention
--------------------------
``R_p`` carries units of m/s, i.e. Pa per (kg m^-2 s^-1), so that the
sublimation flux ``(p_sat - p_wc) / R_p`` is a mass flux with pressures in Pa.
``R0`` is in m/s, ``R2`` is a length in m, and ``R1`` is in m/s as well: the
saturating term ``R1 * S / (R2 + S)`` has initial slope ``R1 / R2`` (1/s).
With the shipped ``R2 = 1 m`` that slope is numerically equal to ``R1``, which
is how the tabulated 1/s ranges for ``R1`` are read.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, NamedTuple, Union

import numpy as np
import yaml
from numba import njit

__all__ = [
    "ModelParameters",
    "ProcessConditions",
    "ParameterBundle",
    "DomainError",
    "ParameterValidationError",
    "saturation_pressure",
    "cake_resistance",
    "sublimation_flux",
    "radiative_sidewall_heat",
    "desorption_rate_constant",
    "validate_parameters",
    "load_parameters",
    "load_conditions",
    "dump_parameters",
    "default_parameters",
    "default_conditions",
    "DATA_DIR",
]

DATA_DIR = Path(__file__).parent / "data"

PathLike = Union[str, Path]


class DomainError(ValueError):
    """Input outside the domain of a closure."""


class ParameterValidationError(ValueError):
    """One or more invariant violations; ``violations`` is a list of
    ``(field, message)`` pairs."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{f}: {m}" for f, m in self.violations)
        super().__init__(f"invalid parameters: {lines}")


@dataclass(frozen=True)
class ModelParameters:
    H: float
    d: float
    rho_f: float
    cp_f: float
    k_f: float
    rho_e: float
    cp_e: float
    k_e: float
    rho_d: float
    dH_sub: float
    dH_des: float
    F1: float
    F2: float
    h: float
    R0: float
    R1: float
    R2: float
    f_a: float
    E_a: float
    sigma_sb: float
    R_gas: float
    cw_eq: float = 0.0

    def replace(self, **changes) -> "ModelParameters":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ProcessConditions:
    T_b: float
    T_u: float
    T_c: float
    p_wc: float
    T_0: float
    cw_0: float = 0.0
    t_0: float = 0.0

    def replace(self, **changes) -> "ProcessConditions":
        return dataclasses.replace(self, **changes)


class ParameterBundle(NamedTuple):
    params: ModelParameters
    conditions: ProcessConditions


# -- closures ----------------------------------------------------------------
# The underscored kernels are shared with the compiled right-hand sides; the
# public wrappers add the domain checks.


@njit(cache=True)
def _psat(T):
    return np.exp(-6139.9 / T + 28.8912)


@njit(cache=True)
def _cake_resistance(S, R0, R1, R2):
    return R0 + R1 * S / (R2 + S)


@njit(cache=True)
def _kd(T, f_a, E_a, R_gas):
    return f_a * np.exp(-E_a / (R_gas * T))


def _as_float_array(x):
    return np.asarray(x, dtype=np.float64)


def _unwrap(x, like):
    return float(x) if np.ndim(like) == 0 else x


def saturation_pressure(T):
    """Water-ice saturation pressure (Pa) at temperature ``T`` (K)."""
    arr = _as_float_array(T)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"temperature must be finite and positive, got {T!r}")
    return _unwrap(np.exp(-6139.9 / arr + 28.8912), T)


def cake_resistance(S, R0: float, R1: float, R2: float):
    """Dried-layer mass-transfer resistance (m/s) at front position ``S`` (m)."""
    arr = _as_float_array(S)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"front position must be non-negative, got {S!r}")
    if not R2 > 0:
        raise DomainError(f"R2 must be positive, got {R2!r}")
    return _unwrap(R0 + R1 * arr / (R2 + arr), S)


def sublimation_flux(T_interface, p_wc: float, R_p):
    """Signed sublimation mass flux (kg m^-2 s^-1).

    Negative values mean the chamber is above saturation; the simulators clamp
    them to zero, this function does not.
    """
    rp = _as_float_array(R_p)
    if np.any(rp <= 0):
        raise DomainError(f"resistance must be positive, got {R_p!r}")
    return (saturation_pressure(T_interface) - p_wc) / R_p


def radiative_sidewall_heat(T, T_c: float, F1: float, area: float, sigma_sb: float):
    """Net radiative power (W) from a wall at ``T_c`` into a surface at ``T``."""
    arr = _as_float_array(T)
    if np.any(arr <= 0) or T_c <= 0:
        raise DomainError("temperatures must be positive")
    if area <= 0:
        raise DomainError(f"area must be positive, got {area!r}")
    return _unwrap(sigma_sb * area * F1 * (T_c**4 - arr**4), T)


def desorption_rate_constant(T, f_a: float, E_a: float, R_gas: float):
    """Arrhenius desorption rate constant (1/s)."""
    arr = _as_float_array(T)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"temperature must be finite and positive, got {T!r}")
    return _unwrap(f_a * np.exp(-E_a / (R_gas * arr)), T)


# -- validation --------------------------------------------------------------

_STRICTLY_POSITIVE = (
    "H", "d", "rho_f", "cp_f", "k_f", "rho_e", "cp_e", "k_e", "rho_d",
    "dH_sub", "sigma_sb", "R_gas",
)  # fmt: skip


def _check_finite(obj, violations):
    for f in fields(obj):
        v = getattr(obj, f.name)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            violations.append((f.name, f"must be a number, got {v!r}"))
        elif not math.isfinite(v):
            violations.append((f.name, f"must be finite, got {v!r}"))


def validate_parameters(
    params: ModelParameters, conditions: ProcessConditions
) -> ParameterBundle:
    """Return the bundle if every invariant holds, else raise
    :class:`ParameterValidationError` naming each offending field."""
    v: list[tuple[str, str]] = []
    _check_finite(params, v)
    _check_finite(conditions, v)
    if v:
        raise ParameterValidationError(v)
    p, c = params, conditions
    for name in _STRICTLY_POSITIVE:
        if getattr(p, name) <= 0:
            v.append((name, "must be strictly positive"))
    if p.rho_f <= p.rho_e:
        v.append(
            ("rho_f", "rho_f - rho_e is the front-speed denominator and must be > 0")
        )
    if p.dH_des < 0:
        v.append(("dH_des", "must be non-negative"))
    if p.R0 < 0:
        v.append(("R0", "cake-resistance constant must be >= 0"))
    if p.R1 < 0:
        v.append(("R1", "cake-resistance constant must be >= 0"))
    if p.R2 <= 0:
        v.append(("R2", "cake-resistance constant must be > 0"))
    if p.f_a < 0:
        v.append(("f_a", "must be >= 0"))
    if p.E_a < 0:
        v.append(("E_a", "must be >= 0"))
    for name in ("F1", "F2"):
        val = getattr(p, name)
        if not 0 <= val <= 1:
            v.append((name, "transfer factor must lie in [0, 1]"))
    if p.h < 0:
        v.append(("h", "must be >= 0"))
    if p.cw_eq < 0:
        v.append(("cw_eq", "must be >= 0"))
    for name in ("T_b", "T_u", "T_c", "T_0"):
        if getattr(c, name) <= 0:
            v.append((name, "temperature must be > 0 K"))
    if c.p_wc < 0:
        v.append(("p_wc", "must be >= 0"))
    if c.cw_0 < 0:
        v.append(("cw_0", "must be >= 0"))
    if v:
        raise ParameterValidationError(v)
    return ParameterBundle(params, conditions)


# -- parameter files ---------------------------------------------------------


def _from_mapping(cls, data: Mapping, source: str):
    if not isinstance(data, Mapping):
        raise ValueError(f"{source}: expected a key/value document")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValueError(f"{source}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(
        f.name
        for f in fields(cls)
        if f.name not in data and f.default is dataclasses.MISSING
    )
    if missing:
        raise ValueError(f"{source}: missing key(s) {', '.join(missing)}")
    values = {}
    for k, val in data.items():
        try:
            values[k] = float(val)
        except (TypeError, ValueError):
            raise ValueError(f"{source}: key {k!r} is not numeric: {val!r}") from None
    return cls(**values)


def _read_yaml(path: PathLike):
    with open(path) as fh:
        try:
            return yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: {exc}") from None


def load_parameters(path: PathLike) -> ModelParameters:
    return _from_mapping(ModelParameters, _read_yaml(path), str(path))


def load_conditions(path: PathLike) -> ProcessConditions:
    return _from_mapping(ProcessConditions, _read_yaml(path), str(path))


def dump_parameters(obj) -> str:
    """Flat ``key: value`` text for a parameter or conditions object."""
    return "".join(f"{f.name}: {getattr(obj, f.name)!r}\n" for f in fields(obj))


def default_parameters() -> ModelParameters:
    return load_parameters(DATA_DIR / "parameters.yaml")


def default_conditions(step: str) -> ProcessConditions:
    """Shipped operating conditions for ``step`` ('primary' or 'secondary')."""
    if step not in ("primary", "secondary"):
        raise ValueError(f"unknown drying step {step!r}")
    return load_conditions(DATA_DIR / f"conditions_{step}.yaml")
