import math

import numpy as np
import pytest
from numba import njit
from scipy.integrate import solve_ivp

from lyopce.integrator import IntegrationError, OdeSystem, integrate


@njit
def decay_rhs(t, y, p):
    return -p[0] * y


@njit
def decay_event(t, y, p):
    return y[0] - p[1]


@njit
def forced_rhs(t, y, p):
    # y' = -y + sin(t): non-autonomous
    out = np.empty(1)
    out[0] = -y[0] + np.sin(t)
    return out


@njit
def robertson_rhs(t, y, p):
    out = np.empty(3)
    out[0] = -0.04 * y[0] + 1e4 * y[1] * y[2]
    out[1] = 0.04 * y[0] - 1e4 * y[1] * y[2] - 3e7 * y[1] ** 2
    out[2] = 3e7 * y[1] ** 2
    return out


@njit
def heat_rhs(t, y, p):
    # 1-D heat equation with fixed ends, semi-discrete
    n = y.shape[0]
    out = np.empty(n)
    c = p[0]
    for i in range(n):
        left = y[i - 1] if i > 0 else 0.0
        right = y[i + 1] if i < n - 1 else 1.0
        out[i] = c * (left - 2.0 * y[i] + right)
    return out


@njit
def blowup_rhs(t, y, p):
    return y * y


def test_linear_decay_matches_exponential():
    sys_ = OdeSystem(2, decay_rhs, np.array([3.0, 0.0]), autonomous=True)
    grid = np.linspace(0.0, 2.0, 21)
    res = integrate(sys_, [1.0, 2.0], (0.0, 2.0), output_grid=grid)
    exact = np.exp(-3.0 * grid)[:, None] * np.array([1.0, 2.0])
    assert res.status == "end-of-span"
    np.testing.assert_allclose(res.t, grid)
    np.testing.assert_allclose(res.y, exact, rtol=1e-5, atol=1e-8)


def test_python_rhs_matches_compiled():
    def py_rhs(t, y, p):
        return -p[0] * y

    a = integrate(OdeSystem(1, py_rhs, np.array([2.0])), [1.0], (0.0, 1.0), output_grid=[1.0])
    b = integrate(OdeSystem(1, decay_rhs, np.array([2.0, 0.0])), [1.0], (0.0, 1.0),
                  output_grid=[1.0])
    assert a.y[-1, 0] == pytest.approx(b.y[-1, 0], rel=1e-12)
    assert a.y[-1, 0] == pytest.approx(math.exp(-2.0), rel=1e-5)


def test_non_autonomous_against_closed_form():
    res = integrate(OdeSystem(1, forced_rhs), [0.0], (0.0, 10.0), output_grid=[10.0])
    t = 10.0
    exact = 0.5 * (math.sin(t) - math.cos(t) + math.exp(-t))
    assert res.y[-1, 0] == pytest.approx(exact, abs=1e-6)


def test_event_located_to_tolerance():
    sys_ = OdeSystem(1, decay_rhs, np.array([1.0, 0.5]), event=decay_event)
    res = integrate(sys_, [1.0], (0.0, 5.0))
    assert res.event_fired
    assert res.t_event == pytest.approx(math.log(2.0), abs=1e-6)
    assert res.t[-1] == res.t_event
    assert res.y[-1, 0] == pytest.approx(0.5, abs=1e-6)


def test_event_appended_to_grid_output():
    sys_ = OdeSystem(1, decay_rhs, np.array([1.0, 0.5]), event=decay_event)
    res = integrate(sys_, [1.0], (0.0, 5.0), output_grid=np.linspace(0, 5, 11))
    assert list(res.t[:-1]) == [0.0, 0.5]
    assert res.t[-1] == pytest.approx(math.log(2.0), abs=1e-6)


def test_stiff_robertson_against_radau():
    t1 = 40.0
    res = integrate(OdeSystem(3, robertson_rhs), [1.0, 0.0, 0.0], (0.0, t1),
                    rtol=1e-8, atol=1e-12, output_grid=[t1])  # fmt: skip
    ref = solve_ivp(lambda t, y: robertson_rhs(t, y, np.zeros(0)), (0, t1), [1.0, 0, 0],
                    method="Radau", rtol=1e-11, atol=1e-14)  # fmt: skip
    np.testing.assert_allclose(res.y[-1], ref.y[:, -1], rtol=1e-6, atol=1e-12)
    # the stiff problem must not need tiny explicit-type steps
    assert res.n_steps < 500


@pytest.mark.parametrize("n", [5, 20])
def test_banded_jacobian_matches_dense(n):
    p = np.array([float((n + 1) ** 2)])
    y0 = np.zeros(n)
    dense = integrate(OdeSystem(n, heat_rhs, p), y0, (0.0, 2.0), output_grid=[2.0])
    banded = integrate(OdeSystem(n, heat_rhs, p, band=1), y0, (0.0, 2.0), output_grid=[2.0])
    np.testing.assert_allclose(banded.y, dense.y, rtol=1e-9, atol=1e-12)
    # steady state is the linear profile
    x = np.arange(1, n + 1) / (n + 1)
    np.testing.assert_allclose(banded.y[-1], x, atol=1e-3)


def test_tolerance_controls_error():
    sys_ = OdeSystem(1, forced_rhs)
    t = 5.0
    exact = 0.5 * (math.sin(t) - math.cos(t) + math.exp(-t))
    errs = [abs(integrate(sys_, [0.0], (0.0, t), rtol=r, atol=r * 1e-2,
                          output_grid=[t]).y[-1, 0] - exact) for r in (1e-4, 1e-8)]  # fmt: skip
    assert errs[1] < errs[0]


def test_failure_carries_context():
    sys_ = OdeSystem(1, blowup_rhs)
    with pytest.raises(IntegrationError) as err:
        integrate(sys_, [1.0], (0.0, 2.0))
    assert err.value.t < 1.0 + 1e-3
    assert err.value.reason in ("non-finite right-hand side", "step-size underflow",
                                "maximum step count exceeded")  # fmt: skip
    assert len(err.value.partial.t) > 0


def test_failure_without_raise():
    res = integrate(OdeSystem(1, blowup_rhs), [1.0], (0.0, 2.0), raise_on_failure=False)
    assert res.status != "end-of-span"


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(t_span=(1.0, 0.0)), "increasing"),
        (dict(rtol=0.0), "positive"),
        (dict(y0=[1.0, 2.0, 3.0]), "dimension"),
        (dict(output_grid=[0.5, 0.2]), "increasing"),
    ],
)
def test_input_checks(kwargs, match):
    args = dict(y0=[1.0, 1.0], t_span=(0.0, 1.0))
    args.update(kwargs)
    sys_ = OdeSystem(2, decay_rhs, np.array([1.0, 0.0]))
    with pytest.raises(ValueError, match=match):
        integrate(sys_, **args)


def test_repeatable_bitwise():
    sys_ = OdeSystem(3, robertson_rhs)
    a = integrate(sys_, [1.0, 0.0, 0.0], (0.0, 10.0))
    b = integrate(sys_, [1.0, 0.0, 0.0], (0.0, 10.0))
    assert np.array_equal(a.y, b.y) and np.array_equal(a.t, b.t)


def test_dense_output_limited_to_step_range():
    from lyopce.integrator import _hermite

    y0, y1 = np.array([1.0, 0.0]), np.array([1.0, 1.0])
    f0, f1 = np.array([0.0, 0.0]), np.array([0.0, 1e6])
    for s in np.linspace(0, 1, 11):
        v = _hermite(0.0, y0, f0, 1.0, y1, f1, s)
        assert 0.0 <= v[1] <= 1.0 and v[0] == 1.0
    # smooth data are still interpolated to third order
    t = 0.3
    v = _hermite(0.0, np.array([0.0]), np.array([1.0]), 0.5, np.array([np.sin(0.5)]),
                 np.array([np.cos(0.5)]), t)  # fmt: skip
    assert abs(v[0] - np.sin(t)) < 1e-3
