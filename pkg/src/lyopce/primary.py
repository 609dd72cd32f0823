"""Primary drying: sublimation of the frozen layer with a moving front.

The frozen region ``S < z < H`` (``z`` measured downward from the product top,
shelf at ``z = H``) is mapped onto ``xi = (z - S) / (H - S)`` in ``[0, 1]``.
On the fixed ``xi`` grid the heat equation gains the front-fixing advection
term ``(1 - xi) * dS/dt / (H - S) * dT/dxi``.  Boundary conditions enter by
ghost-node elimination: Newton cooling against the shelf at ``xi = 1`` and the
sublimation/radiation flux balance at the front ``xi = 0``.

State vector: ``N`` nodal temperatures followed by the front position ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
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
from .physics import (
    ModelParameters,
    ProcessConditions,
    _cake_resistance,
    _psat,
    validate_parameters,
)
from .util import write_csv

__all__ = [
    "PrimaryTrajectory",
    "SimulationError",
    "build_primary_system",
    "simulate_primary",
    "primary_drying_time",
    "DEFAULT_NODES",
    "FRONT_EPSILON",
]

DEFAULT_NODES = 40
FRONT_EPSILON = 1e-3

# layout of the kernel parameter vector
_H, _D, _RHO_F, _CP_F, _K_F, _RHO_E, _DH_SUB, _F1, _F2, _HB = range(10)
_R0, _R1, _R2, _SIG, _TB, _TU, _TC, _PWC, _EPS = range(10, 19)
_NPAR = 19


class SimulationError(RuntimeError):
    """Integrator failure with the model state at the failing time."""


def _kernel_params(p: ModelParameters, c: ProcessConditions, eps_s: float):
    out = np.empty(_NPAR)
    out[_H] = p.H
    out[_D] = p.d
    out[_RHO_F] = p.rho_f
    out[_CP_F] = p.cp_f
    out[_K_F] = p.k_f
    out[_RHO_E] = p.rho_e
    out[_DH_SUB] = p.dH_sub
    out[_F1] = p.F1
    out[_F2] = p.F2
    out[_HB] = p.h
    out[_R0] = p.R0
    out[_R1] = p.R1
    out[_R2] = p.R2
    out[_SIG] = p.sigma_sb
    out[_TB] = c.T_b
    out[_TU] = c.T_u
    out[_TC] = c.T_c
    out[_PWC] = c.p_wc
    out[_EPS] = eps_s
    return out


@njit(cache=True)
def _front_flux(T_i, S, q):
    """Clamped sublimation flux at interface temperature ``T_i``."""
    rp = _cake_resistance(S, q[_R0], q[_R1], q[_R2])
    nw = (_psat(T_i) - q[_PWC]) / rp
    return nw if nw > 0.0 else 0.0


@njit(cache=True)
def primary_rhs(t, y, q):
    n = y.shape[0] - 1
    S = y[n]
    H = q[_H]
    L = H - S
    if L < 1e-9 * H:
        L = 1e-9 * H
    dxi = 1.0 / (n - 1)
    kf = q[_K_F]
    sig = q[_SIG]
    rcp = q[_RHO_F] * q[_CP_F]

    T0 = y[0]
    nw = _front_flux(T0, S, q)
    sdot = nw / (q[_RHO_F] - q[_RHO_E])
    # dT/dxi at the front and at the shelf side
    g0 = L / kf * (nw * q[_DH_SUB] - sig * q[_F2] * (q[_TU] ** 4 - T0**4))
    g1 = -L * q[_HB] * (y[n - 1] - q[_TB]) / kf
    # sidewall radiation per unit frozen volume, area pi*d*H
    qfac = sig * q[_F1] * np.pi * q[_D] * H / (np.pi * q[_D] ** 2 * L)
    tc4 = q[_TC] ** 4
    diff = kf / (L * L * dxi * dxi)
    adv = sdot / L

    out = np.empty(n + 1)
    out[0] = (diff * (2.0 * y[1] - 2.0 * T0 - 2.0 * dxi * g0)
              + qfac * (tc4 - T0**4)) / rcp + adv * g0  # fmt: skip
    for i in range(1, n - 1):
        xi = i * dxi
        ti = y[i]
        lap = y[i + 1] - 2.0 * ti + y[i - 1]
        grad = (y[i + 1] - y[i - 1]) / (2.0 * dxi)
        out[i] = (diff * lap + qfac * (tc4 - ti**4)) / rcp + (1.0 - xi) * adv * grad
    tn = y[n - 1]
    out[n - 1] = (diff * (2.0 * y[n - 2] - 2.0 * tn + 2.0 * dxi * g1)
                  + qfac * (tc4 - tn**4)) / rcp  # fmt: skip
    out[n] = sdot
    return out


@njit(cache=True)
def primary_event(t, y, q):
    n = y.shape[0] - 1
    return y[n] - (1.0 - q[_EPS]) * q[_H]


def build_primary_system(
    params: ModelParameters,
    conditions: ProcessConditions,
    N: int = DEFAULT_NODES,
    epsilon_S: float = FRONT_EPSILON,
) -> OdeSystem:
    """Front-fixed method-of-lines system of dimension ``N + 1``."""
    if int(N) != N or N < 3:
        raise ValueError(f"node count must be an integer >= 3, got {N!r}")
    validate_parameters(params, conditions)
    return OdeSystem(
        dimension=int(N) + 1,
        rhs=primary_rhs,
        params=_kernel_params(params, conditions, epsilon_S),
        event=primary_event,
        autonomous=True,
    )


@dataclass(frozen=True)
class PrimaryTrajectory:
    """Sampled primary-drying solution.

    ``theta`` has one row per time node and one column per ``xi`` node
    (``xi = 0`` is the front, ``xi = 1`` the shelf side).
    """

    t: np.ndarray
    theta: np.ndarray
    S: np.ndarray
    T_interface: np.ndarray
    N_w: np.ndarray
    xi: np.ndarray
    H: float
    drying_time: Optional[float] = None

    @property
    def T_bottom(self) -> np.ndarray:
        return self.theta[:, -1]

    @property
    def T_mean(self) -> np.ndarray:
        """Frozen-layer average temperature (trapezoidal in ``xi``)."""
        return np.trapezoid(self.theta, self.xi, axis=1)

    def to_csv(self, path) -> None:
        write_csv(
            path,
            ["t [s]", "S [m]", "T_interface [K]", "T_bottom [K]", "N_w [kg/(m^2 s)]"],
            np.column_stack([self.t, self.S, self.T_interface, self.T_bottom, self.N_w]),
        )

    def field_to_csv(self, path) -> None:
        header = ["t [s]"] + [f"T(xi={x!r}) [K]" for x in self.xi]
        write_csv(path, header, np.column_stack([self.t, self.theta]))


def simulate_primary(
    params: ModelParameters,
    conditions: ProcessConditions,
    N: int = DEFAULT_NODES,
    t_end: float = 7200.0,
    output_grid=None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    epsilon_S: float = FRONT_EPSILON,
) -> PrimaryTrajectory:
    """Integrate primary drying from a uniform ``T_0`` with ``S = 0``.

    Without ``output_grid`` the solution is reported at the accepted steps.
    Integration stops early when the front reaches ``(1 - epsilon_S) * H``.
    """
    t0 = conditions.t_0
    if not t_end > t0:
        raise ValueError(f"t_end must exceed t_0 = {t0}, got {t_end}")
    system = build_primary_system(params, conditions, N, epsilon_S)
    y0 = np.append(np.full(int(N), conditions.T_0), 0.0)
    try:
        res = integrate(system, y0, (t0, t_end), rtol, atol, output_grid)
    except IntegrationError as exc:
        last = exc.partial.y[-1] if len(exc.partial.y) else y0
        raise SimulationError(
            f"primary drying failed ({exc.reason}) at t = {exc.t:.6g} s, "
            f"S = {last[-1]:.6g} m, T in [{last[:-1].min():.6g}, {last[:-1].max():.6g}] K"
        ) from exc
    return _trajectory(res.t, res.y, system.params, params.H, res.t_event)


def _trajectory(t, y, q, H, t_event):
    theta = y[:, :-1]
    S = y[:, -1]
    n = theta.shape[1]
    nw = np.array([_front_flux(theta[k, 0], S[k], q) for k in range(len(t))])
    return PrimaryTrajectory(
        t=t,
        theta=theta,
        S=S,
        T_interface=theta[:, 0].copy(),
        N_w=nw,
        xi=np.linspace(0.0, 1.0, n),
        H=H,
        drying_time=t_event,
    )


def primary_drying_time(trajectory: PrimaryTrajectory) -> Optional[float]:
    """Time at which sublimation completed, or ``None`` if it did not."""
    if len(trajectory.t) == 0:
        raise ValueError("empty trajectory")
    return trajectory.drying_time
