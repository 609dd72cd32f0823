"""Secondary drying: desorption of bound water from the dried cake.

Fixed domain ``0 <= z <= H`` (``z = 0`` is the top, radiating to the upper
plate; ``z = H`` faces the shelf).  Temperature and bound water are co-located
on a uniform grid and interleaved in the state vector as
``[T_0, c_0, T_1, c_1, ...]`` so the Jacobian has half-bandwidth 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .integrator import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    IntegrationError,
    OdeSystem,
    integrate,
)
from .physics import ModelParameters, ProcessConditions, _kd, validate_parameters
from .primary import DEFAULT_NODES, SimulationError
from .util import write_csv

__all__ = [
    "SecondaryTrajectory",
    "build_secondary_system",
    "simulate_secondary",
    "average_bound_water",
    "secondary_drying_time",
    "TARGET_CONCENTRATION",
]

TARGET_CONCENTRATION = 0.01

_H, _D, _RHO_E, _CP_E, _K_E, _RHO_D, _DH_DES, _F1, _F2, _HB = range(10)
_FA, _EA, _RGAS, _SIG, _CWEQ, _TB, _TU, _TC = range(10, 18)
_NPAR = 18


def _kernel_params(p: ModelParameters, c: ProcessConditions):
    return np.array(
        [
            p.H, p.d, p.rho_e, p.cp_e, p.k_e, p.rho_d, p.dH_des, p.F1, p.F2, p.h,
            p.f_a, p.E_a, p.R_gas, p.sigma_sb, p.cw_eq, c.T_b, c.T_u, c.T_c,
        ],  # fmt: skip
        dtype=np.float64,
    )


@njit(cache=True)
def secondary_rhs(t, y, q):
    n = y.shape[0] // 2
    H = q[_H]
    dz = H / (n - 1)
    ke = q[_K_E]
    sig = q[_SIG]
    rcp = q[_RHO_E] * q[_CP_E]
    src = q[_RHO_D] * q[_DH_DES]
    qfac = sig * q[_F1] * np.pi * q[_D] * H / (np.pi * q[_D] ** 2 * H)
    tc4 = q[_TC] ** 4
    diff = ke / (dz * dz)

    T_top = y[0]
    T_bot = y[2 * (n - 1)]
    g0 = -sig * q[_F2] * (q[_TU] ** 4 - T_top**4) / ke
    g1 = -q[_HB] * (T_bot - q[_TB]) / ke

    out = np.empty(2 * n)
    for i in range(n):
        ti = y[2 * i]
        ci = y[2 * i + 1]
        dc = _kd(ti, q[_FA], q[_EA], q[_RGAS]) * (q[_CWEQ] - ci)
        if i == 0:
            lap = 2.0 * y[2] - 2.0 * ti - 2.0 * dz * g0
        elif i == n - 1:
            lap = 2.0 * y[2 * (n - 2)] - 2.0 * ti + 2.0 * dz * g1
        else:
            lap = y[2 * (i + 1)] - 2.0 * ti + y[2 * (i - 1)]
        out[2 * i] = (diff * lap + src * dc + qfac * (tc4 - ti**4)) / rcp
        out[2 * i + 1] = dc
    return out


def build_secondary_system(
    params: ModelParameters, conditions: ProcessConditions, N: int = DEFAULT_NODES
) -> OdeSystem:
    """Method-of-lines system of dimension ``2 N`` (interleaved T, c_w)."""
    if int(N) != N or N < 3:
        raise ValueError(f"node count must be an integer >= 3, got {N!r}")
    validate_parameters(params, conditions)
    return OdeSystem(
        dimension=2 * int(N),
        rhs=secondary_rhs,
        params=_kernel_params(params, conditions),
        band=2,
        autonomous=True,
    )


def average_bound_water(c_w, z=None) -> float:
    """Trapezoidal spatial average of a bound-water field over ``[0, H]``."""
    c = np.asarray(c_w, dtype=np.float64)
    if c.size == 0:
        raise ValueError("empty concentration field")
    if c.size == 1:
        return float(c[0])
    x = np.linspace(0.0, 1.0, c.size) if z is None else np.asarray(z, float)
    return float(np.trapezoid(c, x) / (x[-1] - x[0]))


@dataclass(frozen=True)
class SecondaryTrajectory:
    t: np.ndarray
    T: np.ndarray
    c_w: np.ndarray
    z: np.ndarray

    @property
    def cw_mean(self) -> np.ndarray:
        return np.trapezoid(self.c_w, self.z, axis=1) / (self.z[-1] - self.z[0])

    @property
    def T_mean(self) -> np.ndarray:
        return np.trapezoid(self.T, self.z, axis=1) / (self.z[-1] - self.z[0])

    @property
    def T_top(self) -> np.ndarray:
        return self.T[:, 0]

    @property
    def T_bottom(self) -> np.ndarray:
        return self.T[:, -1]

    def to_csv(self, path) -> None:
        write_csv(
            path,
            ["t [s]", "T_top [K]", "T_bottom [K]", "cw_mean [wt/wt]"],
            np.column_stack([self.t, self.T_top, self.T_bottom, self.cw_mean]),
        )

    def field_to_csv(self, path) -> None:
        header = (
            ["t [s]"]
            + [f"T(z={z!r}) [K]" for z in self.z]
            + [f"c_w(z={z!r}) [wt/wt]" for z in self.z]
        )
        write_csv(path, header, np.column_stack([self.t, self.T, self.c_w]))


def simulate_secondary(
    params: ModelParameters,
    conditions: ProcessConditions,
    N: int = DEFAULT_NODES,
    t_end: float = 36000.0,
    output_grid=None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> SecondaryTrajectory:
    """Integrate secondary drying from uniform ``T_0`` and ``cw_0``."""
    t0 = conditions.t_0
    if not t_end > t0:
        raise ValueError(f"t_end must exceed t_0 = {t0}, got {t_end}")
    system = build_secondary_system(params, conditions, N)
    n = int(N)
    y0 = np.empty(2 * n)
    y0[0::2] = conditions.T_0
    y0[1::2] = conditions.cw_0
    try:
        res = integrate(system, y0, (t0, t_end), rtol, atol, output_grid)
    except IntegrationError as exc:
        last = exc.partial.y[-1] if len(exc.partial.y) else y0
        raise SimulationError(
            f"secondary drying failed ({exc.reason}) at t = {exc.t:.6g} s, "
            f"T in [{last[0::2].min():.6g}, {last[0::2].max():.6g}] K, "
            f"c_w in [{last[1::2].min():.6g}, {last[1::2].max():.6g}]"
        ) from exc
    return SecondaryTrajectory(
        t=res.t,
        T=res.y[:, 0::2].copy(),
        c_w=res.y[:, 1::2].copy(),
        z=np.linspace(0.0, params.H, n),
    )


def secondary_drying_time(
    trajectory: SecondaryTrajectory, target: float = TARGET_CONCENTRATION
) -> Optional[float]:
    """First time the average bound water reaches ``target`` (linear
    interpolation between output nodes), or ``None`` if it never does."""
    if not target > 0:
        raise ValueError(f"target must be positive, got {target!r}")
    return first_crossing(trajectory.t, trajectory.cw_mean, target)


def first_crossing(t, values, target) -> Optional[float]:
    """First time a sampled series drops to ``target`` or below."""
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    below = np.nonzero(v <= target)[0]
    if below.size == 0:
        return None
    k = int(below[0])
    if k == 0:
        return float(t[0])
    v0, v1 = v[k - 1], v[k]
    frac = (v0 - target) / (v0 - v1)
    return float(t[k - 1] + frac * (t[k] - t[k - 1]))
