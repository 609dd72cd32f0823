"""Adaptive stiff time integration for method-of-lines systems.

The stepper is a four-stage-order, stiffly accurate, L-stable Rosenbrock
scheme (the RODAS coefficient set of Hairer and Wanner) with an embedded
third-order solution for step-size control.  The Jacobian is rebuilt at every
step by forward differences, grouping columns when the system declares a band.

The core loop is written once.  Each system gets its own copy with the
right-hand side bound as a global: numba-compiled kernels run it compiled
(and disk-cached), plain Python callables run the very same source
interpreted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import hashlib
import inspect
import types

import numpy as np
from numba import njit
from numba.extending import is_jitted

__all__ = [
    "OdeSystem",
    "IntegrationResult",
    "IntegrationError",
    "integrate",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
    "EVENT_TIME_TOL",
]

DEFAULT_RTOL = 1e-6
DEFAULT_ATOL = 1e-8
EVENT_TIME_TOL = 1e-6

STATUS_END = 0
STATUS_EVENT = 1
STATUS_UNDERFLOW = 2
STATUS_NONFINITE = 3
STATUS_MAXSTEPS = 4

_STATUS_NAMES = {
    STATUS_END: "end-of-span",
    STATUS_EVENT: "event",
    STATUS_UNDERFLOW: "step-size underflow",
    STATUS_NONFINITE: "non-finite right-hand side",
    STATUS_MAXSTEPS: "maximum step count exceeded",
}

# RODAS (Hairer & Wanner, method 1) in the transformed-variable form.
_GAMMA = 0.25
_C2, _C3, _C4 = 0.386, 0.21, 0.63
_D1, _D2, _D3, _D4 = 0.25, -0.1043, 0.1035, -0.03620000000000023
_A21 = 1.544
_A31, _A32 = 0.9466785280815826, 0.2557011698983284
_A41, _A42, _A43 = 3.314825187068521, 2.896124015972201, 0.9986419139977817
_A51, _A52, _A53, _A54 = (
    1.221224509226641,
    6.019134481288629,
    12.53708332932087,
    -0.6878860361058950,
)
_C21 = -5.6688
_C31, _C32 = -2.430093356833875, -0.2063599157091915
_C41, _C42, _C43 = -0.1073529058151375, -9.594562251023355, -20.47028614809616
_C51, _C52, _C53, _C54 = (
    7.496443313967647,
    -10.24680431464352,
    -33.99990352819905,
    11.70890893206160,
)
_C61, _C62, _C63, _C64, _C65 = (
    8.083246795921522,
    -7.981132988064893,
    -31.52159432874371,
    16.31930543123136,
    -6.058818238834054,
)


class IntegrationError(RuntimeError):
    """Raised when the stepper cannot reach the end of the span.

    ``reason`` is one of the failure diagnostics, ``t`` the failing time and
    ``partial`` the :class:`IntegrationResult` up to that time.
    """

    def __init__(self, reason: str, t: float, partial: "IntegrationResult"):
        super().__init__(f"{reason} at t = {t!r}")
        self.reason = reason
        self.t = t
        self.partial = partial


@dataclass(frozen=True)
class OdeSystem:
    """First-order system ``dy/dt = rhs(t, y, p)``.

    ``rhs`` and ``event`` take a parameter vector ``p`` as third argument so
    that numba-compiled kernels can be shared between parameter sets.  When
    ``rhs`` is a numba dispatcher, ``event`` must be one as well.

    ``event(t, y, p)`` is a scalar whose sign change ends the integration.
    ``band`` declares the Jacobian half-bandwidth; -1 means dense.
    """

    dimension: int
    rhs: Callable
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    event: Optional[Callable] = None
    band: int = -1
    autonomous: bool = False

    @property
    def compiled(self) -> bool:
        return is_jitted(self.rhs)


@dataclass(frozen=True)
class IntegrationResult:
    t: np.ndarray
    y: np.ndarray
    status: str
    t_event: Optional[float] = None
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0

    @property
    def event_fired(self) -> bool:
        return self.status == "event"


@njit(cache=True)
def _lu_factor(a):
    n = a.shape[0]
    lu = a.copy()
    piv = np.arange(n)
    for k in range(n):
        p = k
        big = abs(lu[k, k])
        for i in range(k + 1, n):
            if abs(lu[i, k]) > big:
                big = abs(lu[i, k])
                p = i
        if p != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
            tmp_i = piv[k]
            piv[k] = piv[p]
            piv[p] = tmp_i
        pivot = lu[k, k]
        if pivot == 0.0:
            continue
        for i in range(k + 1, n):
            m = lu[i, k] / pivot
            if m != 0.0:
                lu[i, k] = m
                for j in range(k + 1, n):
                    lu[i, j] -= m * lu[k, j]
            else:
                lu[i, k] = 0.0
    return lu, piv


@njit(cache=True)
def _lu_solve(lu, piv, b):
    n = lu.shape[0]
    x = np.empty(n)
    for i in range(n):
        x[i] = b[piv[i]]
    for i in range(n):
        s = x[i]
        for j in range(i):
            s -= lu[i, j] * x[j]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= lu[i, j] * x[j]
        x[i] = s / lu[i, i]
    return x


@njit(cache=True)
def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    v = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
    # limit to the endpoint range: on stiff steps the end slopes can be far
    # larger than the accepted change and the cubic would overshoot
    return np.minimum(np.maximum(v, np.minimum(y0, y1)), np.maximum(y0, y1))


@njit(cache=True)
def _all_finite(v):
    for x in v:
        if not np.isfinite(x):
            return False
    return True


@njit(cache=True)
def _err_norm(err, y, ynew, rtol, atol):
    s = 0.0
    n = err.shape[0]
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        s += (err[i] / sc) ** 2
    return np.sqrt(s / n)


@njit(cache=True)
def _no_event(t, y, p):
    return -1.0


def _solve(
    p,
    y0,
    t0,
    t1,
    grid,
    use_grid,
    has_event,
    rtol,
    atol,
    band,
    autonomous,
    max_steps,
    event_tol,
):
    n = y0.shape[0]
    eps = np.finfo(np.float64).eps
    y = y0.copy()
    t = t0
    f = _RHS(t, y, p)
    nfev = 1

    cap = 64
    if use_grid:
        cap = grid.shape[0] + 1
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    nout = 0
    gi = 0
    if use_grid:
        while gi < grid.shape[0] and grid[gi] <= t0:
            ts[nout] = grid[gi]
            ys[nout, :] = y
            nout += 1
            gi += 1
    else:
        ts[0] = t0
        ys[0, :] = y
        nout = 1

    if not _all_finite(f):
        return STATUS_NONFINITE, ts[:nout], ys[:nout], t, 0, 0, nfev

    g_old = 0.0
    if has_event:
        g_old = _EVENT(t, y, p)

    # initial step from the size of the first derivative
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * (t1 - t0)
    else:
        h = 0.01 * d0 / d1
    h = min(h, (t1 - t0) * 0.1)
    h = max(h, 1e-12 * max(1.0, abs(t0)))

    jac = np.empty((n, n))
    ftime = np.zeros(n)
    ident = np.eye(n)
    nsteps = 0
    nrej = 0
    status = STATUS_END
    last_rejected = False
    scale = 1.0

    while t < t1:
        if nsteps >= max_steps:
            status = STATUS_MAXSTEPS
            break
        if h < 10.0 * eps * max(1.0, abs(t)):
            status = STATUS_UNDERFLOW
            break
        if t + h > t1:
            h = t1 - t
        if t + 1.01 * h >= t1:
            h = t1 - t

        # forward-difference Jacobian, column groups when banded
        if band < 0:
            ngroup = n
        else:
            ngroup = min(n, 2 * band + 1)
        for g in range(ngroup):
            yp = y.copy()
            dels = np.zeros(n)
            j = g
            while j < n:
                dels[j] = np.sqrt(eps * max(1e-5, abs(y[j])))
                yp[j] = y[j] + dels[j]
                j += ngroup
            fp = _RHS(t, yp, p)
            nfev += 1
            j = g
            while j < n:
                lo = 0
                hi = n
                if band >= 0:
                    lo = max(0, j - band)
                    hi = min(n, j + band + 1)
                for i in range(n):
                    if i >= lo and i < hi:
                        jac[i, j] = (fp[i] - f[i]) / dels[j]
                    else:
                        jac[i, j] = 0.0
                j += ngroup
        if not autonomous:
            dt = np.sqrt(eps * max(1e-5, abs(t)))
            fp = _RHS(t + dt, y, p)
            nfev += 1
            for i in range(n):
                ftime[i] = (fp[i] - f[i]) / dt

        accepted = False
        while not accepted:
            if h < 10.0 * eps * max(1.0, abs(t)):
                status = STATUS_UNDERFLOW
                break
            fac = 1.0 / (h * _GAMMA)
            lu, piv = _lu_factor(fac * ident - jac)

            k1 = _lu_solve(lu, piv, f + h * _D1 * ftime)
            f2 = _RHS(t + _C2 * h, y + _A21 * k1, p)
            k2 = _lu_solve(lu, piv, f2 + (_C21 / h) * k1 + h * _D2 * ftime)
            f3 = _RHS(t + _C3 * h, y + _A31 * k1 + _A32 * k2, p)
            k3 = _lu_solve(
                lu, piv, f3 + (_C31 * k1 + _C32 * k2) / h + h * _D3 * ftime
            )
            f4 = _RHS(t + _C4 * h, y + _A41 * k1 + _A42 * k2 + _A43 * k3, p)
            k4 = _lu_solve(
                lu,
                piv,
                f4 + (_C41 * k1 + _C42 * k2 + _C43 * k3) / h + h * _D4 * ftime,
            )
            y5 = y + _A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4
            f5 = _RHS(t + h, y5, p)
            k5 = _lu_solve(
                lu, piv, f5 + (_C51 * k1 + _C52 * k2 + _C53 * k3 + _C54 * k4) / h
            )
            y6 = y5 + k5
            f6 = _RHS(t + h, y6, p)
            k6 = _lu_solve(
                lu,
                piv,
                f6 + (_C61 * k1 + _C62 * k2 + _C63 * k3 + _C64 * k4 + _C65 * k5) / h,
            )
            ynew = y6 + k6
            nfev += 5

            if not _all_finite(ynew):
                h *= 0.25
                nrej += 1
                last_rejected = True
                continue
            err = _err_norm(k6, y, ynew, rtol, atol)
            if not np.isfinite(err):
                h *= 0.25
                nrej += 1
                last_rejected = True
                continue
            if err <= 1.0:
                fnew = _RHS(t + h, ynew, p)
                nfev += 1
                if not _all_finite(fnew):
                    h *= 0.25
                    nrej += 1
                    last_rejected = True
                    continue
                accepted = True
                scale = 6.0 if err == 0.0 else min(6.0, max(0.2, 0.9 * err**-0.25))
                if last_rejected:
                    scale = min(scale, 1.0)
                last_rejected = False
            else:
                nrej += 1
                last_rejected = True
                h *= max(0.2, 0.9 * err**-0.25)

        if not accepted:
            break
        nsteps += 1
        tnew = t + h
        if tnew > t1 or t1 - tnew < 4.0 * eps * max(1.0, abs(t1)):
            tnew = t1

        t_stop = tnew
        fired = False
        if has_event:
            g_new = _EVENT(tnew, ynew, p)
            if (g_old < 0.0 and g_new >= 0.0) or (g_old > 0.0 and g_new <= 0.0):
                fired = True
                a = t
                b = tnew
                while b - a > event_tol:
                    mid = 0.5 * (a + b)
                    ym = _hermite(t, y, f, tnew, ynew, fnew, mid)
                    gm = _EVENT(mid, ym, p)
                    if (g_old < 0.0 and gm >= 0.0) or (g_old > 0.0 and gm <= 0.0):
                        b = mid
                    else:
                        a = mid
                t_stop = b
            g_old = g_new

        if use_grid:
            while gi < grid.shape[0] and grid[gi] <= t_stop:
                ts[nout] = grid[gi]
                ys[nout, :] = _hermite(t, y, f, tnew, ynew, fnew, grid[gi])
                nout += 1
                gi += 1
            if fired:
                ts[nout] = t_stop
                ys[nout, :] = _hermite(t, y, f, tnew, ynew, fnew, t_stop)
                nout += 1
        else:
            if nout >= cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, n))
                ts2[:nout] = ts[:nout]
                ys2[:nout, :] = ys[:nout, :]
                ts = ts2
                ys = ys2
            ts[nout] = t_stop
            if fired:
                ys[nout, :] = _hermite(t, y, f, tnew, ynew, fnew, t_stop)
            else:
                ys[nout, :] = ynew
            nout += 1

        if fired:
            t = t_stop
            status = STATUS_EVENT
            break

        t = tnew
        y = ynew
        f = fnew
        h *= scale

    return status, ts[:nout], ys[:nout], t, nsteps, nrej, nfev


_SPECIALIZED: dict = {}


def _source_digest(fn) -> str:
    py = getattr(fn, "py_func", fn)
    try:
        path = inspect.getsourcefile(py)
        with open(path, "rb") as fh:
            data = fh.read()
    except (TypeError, OSError):
        data = repr(py).encode()
    return hashlib.sha1(data).hexdigest()[:12]


def _specialize(rhs, event, compiled: bool):
    """Bind ``rhs``/``event`` into a private copy of the stepper.

    Compiled copies get a qualname derived from the kernels' source so numba
    can cache them on disk without mixing up different models.
    """
    key = (rhs, event, compiled)
    fn = _SPECIALIZED.get(key)
    if fn is not None:
        return fn
    scope = dict(_solve.__globals__)
    scope["_RHS"] = rhs
    scope["_EVENT"] = event
    if compiled:
        tag = _source_digest(rhs) + _source_digest(event)
        name = f"_solve_{getattr(rhs, '__name__', 'rhs')}_{tag}"
    else:
        name = "_solve_py"
    fn = types.FunctionType(_solve.__code__, scope, name)
    fn.__qualname__ = name
    fn.__module__ = _solve.__module__
    if compiled:
        fn = njit(cache=True)(fn)
    _SPECIALIZED[key] = fn
    return fn


def integrate(
    system: OdeSystem,
    y0,
    t_span: tuple[float, float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    output_grid=None,
    max_steps: int = 100_000,
    event_tol: float = EVENT_TIME_TOL,
    raise_on_failure: bool = True,
) -> IntegrationResult:
    """Integrate ``system`` from ``y0`` over ``t_span``.

    Without ``output_grid`` every accepted step is reported; with it the
    solution is sampled on the grid nodes inside the span by cubic Hermite
    interpolation limited to each step's range, and the event time is appended when the event fires.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"t_span must be increasing, got {t_span!r}")
    if not (rtol > 0 and atol > 0):
        raise ValueError("tolerances must be positive")
    y0 = np.ascontiguousarray(y0, dtype=np.float64).ravel()
    if y0.shape[0] != system.dimension:
        raise ValueError(
            f"y0 has dimension {y0.shape[0]}, system expects {system.dimension}"
        )
    if output_grid is None:
        grid = np.zeros(0)
        use_grid = False
    else:
        grid = np.ascontiguousarray(output_grid, dtype=np.float64).ravel()
        if grid.size and np.any(np.diff(grid) <= 0):
            raise ValueError("output_grid must be strictly increasing")
        grid = grid[(grid >= t0) & (grid <= t1)]
        use_grid = True
    params = np.ascontiguousarray(system.params, dtype=np.float64)
    has_event = system.event is not None

    compiled = system.compiled
    if compiled:
        event = system.event if has_event else _no_event
    else:
        event = system.event if has_event else _no_event.py_func
    runner = _specialize(system.rhs, event, compiled)

    status, ts, ys, t_last, nsteps, nrej, nfev = runner(
        params,
        y0,
        t0,
        t1,
        grid,
        use_grid,
        has_event,
        float(rtol),
        float(atol),
        int(system.band),
        bool(system.autonomous),
        int(max_steps),
        float(event_tol),
    )
    result = IntegrationResult(
        t=np.array(ts),
        y=np.array(ys),
        status=_STATUS_NAMES[int(status)],
        t_event=float(t_last) if status == STATUS_EVENT else None,
        n_steps=int(nsteps),
        n_rejected=int(nrej),
        n_rhs=int(nfev),
    )
    if status not in (STATUS_END, STATUS_EVENT) and raise_on_failure:
        raise IntegrationError(result.status, float(t_last), result)
    return result
