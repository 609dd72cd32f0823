import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lyopce.physics import desorption_rate_constant
from lyopce.secondary import (
    average_bound_water,
    build_secondary_system,
    first_crossing,
    secondary_drying_time,
    simulate_secondary,
)

HOUR = 3600.0


@pytest.fixture(scope="module")
def nominal(params, secondary_conditions):
    grid = np.linspace(0.0, 10 * HOUR, 2001)
    return simulate_secondary(params, secondary_conditions, t_end=grid[-1], output_grid=grid)


def test_system_dimension(params, secondary_conditions):
    sys_ = build_secondary_system(params, secondary_conditions, N=17)
    assert sys_.dimension == 34 and sys_.band == 2


def test_isothermal_desorption_closed_form(params, secondary_conditions):
    # no heat exchange and no desorption heat: T stays at T_0
    p = params.replace(F1=0.0, F2=0.0, h=0.0, dH_des=0.0)
    c = secondary_conditions.replace(T_0=300.0)
    grid = np.linspace(0.0, 10 * HOUR, 41)
    tr = simulate_secondary(p, c, t_end=grid[-1], output_grid=grid)
    k = desorption_rate_constant(300.0, p.f_a, p.E_a, p.R_gas)
    exact = c.cw_0 * np.exp(-k * grid)
    np.testing.assert_allclose(tr.c_w, np.repeat(exact[:, None], tr.c_w.shape[1], 1),
                               rtol=1e-4)  # fmt: skip
    np.testing.assert_allclose(tr.T, 300.0, rtol=1e-12)


def test_equilibrium_concentration_limit(params, secondary_conditions):
    p = params.replace(F1=0.0, F2=0.0, h=0.0, dH_des=0.0, cw_eq=0.02)
    tr = simulate_secondary(p, secondary_conditions, t_end=100 * HOUR, output_grid=[100 * HOUR])
    assert tr.cw_mean[-1] == pytest.approx(0.02, rel=1e-3)


def test_concentration_non_increasing(nominal):
    assert np.all(np.diff(nominal.c_w, axis=0) <= 1e-14)
    assert nominal.c_w.min() >= 0.0


def test_desorption_mass_consistency(nominal, params):
    # cw_0 - mean c_w(t) equals the time integral of the mean desorption rate
    kd = desorption_rate_constant(nominal.T, params.f_a, params.E_a, params.R_gas)
    rate = np.array([average_bound_water(r, nominal.z) for r in kd * nominal.c_w])
    integral = np.sum(0.5 * (rate[1:] + rate[:-1]) * np.diff(nominal.t))
    removed = nominal.cw_mean[0] - nominal.cw_mean[-1]
    assert removed == pytest.approx(integral, rel=5e-3)


def test_long_time_temperature_limit(params, secondary_conditions):
    # all ambient temperatures equal: the field relaxes onto them
    c = secondary_conditions.replace(T_b=300.0, T_u=300.0, T_c=300.0)
    tr = simulate_secondary(params, c, t_end=40 * HOUR, output_grid=[40 * HOUR])
    assert np.max(np.abs(tr.T[-1] - 300.0)) < 0.05


def test_desorption_cools_product(params, secondary_conditions):
    c = secondary_conditions.replace(T_0=295.0)
    tr = simulate_secondary(params, c, t_end=600.0, output_grid=[600.0])
    assert tr.T_mean[-1] < 295.0


def test_faster_kinetics_dry_sooner(params, secondary_conditions, nominal):
    grid = nominal.t
    fast = simulate_secondary(params.replace(f_a=2 * params.f_a), secondary_conditions,
                              t_end=grid[-1], output_grid=grid)  # fmt: skip
    assert secondary_drying_time(fast) < secondary_drying_time(nominal)


def test_zero_kinetics_never_dries(params, secondary_conditions):
    tr = simulate_secondary(params.replace(f_a=0.0), secondary_conditions, t_end=HOUR)
    np.testing.assert_allclose(tr.cw_mean, secondary_conditions.cw_0, rtol=1e-14)
    assert secondary_drying_time(tr) is None


def test_starting_below_target(params, secondary_conditions):
    tr = simulate_secondary(params, secondary_conditions.replace(cw_0=0.005), t_end=HOUR)
    assert secondary_drying_time(tr) == 0.0


def test_drying_time_against_refined_resimulation(params, secondary_conditions, nominal):
    t_f = secondary_drying_time(nominal)
    # re-simulate on a fine grid around the coarse answer
    fine = np.linspace(t_f - 60.0, t_f + 60.0, 1201)
    tr = simulate_secondary(params, secondary_conditions, t_end=fine[-1], output_grid=fine)
    assert secondary_drying_time(tr) == pytest.approx(t_f, abs=1.0)


def test_drying_time_rejects_bad_target(nominal):
    with pytest.raises(ValueError):
        secondary_drying_time(nominal, 0.0)


def test_first_crossing_interpolates():
    assert first_crossing([0, 1, 2], [3.0, 2.0, 1.0], 1.5) == pytest.approx(1.5)
    assert first_crossing([0, 1], [3.0, 2.0], 1.0) is None


def test_average_uniform_and_linear():
    assert average_bound_water(np.full(7, 0.05)) == pytest.approx(0.05)
    assert average_bound_water(np.linspace(0.0, 0.08, 11)) == pytest.approx(0.04)
    assert average_bound_water([0.3]) == 0.3
    with pytest.raises(ValueError):
        average_bound_water([])


@given(st.lists(st.floats(0, 1), min_size=2, max_size=50))
def test_average_non_negative_and_bounded(values):
    avg = average_bound_water(np.array(values))
    assert min(values) - 1e-12 <= avg <= max(values) + 1e-12


def test_grid_and_tolerance_convergence(params, secondary_conditions):
    t = 5 * HOUR
    base = simulate_secondary(params, secondary_conditions, t_end=t, output_grid=[t])
    fine = simulate_secondary(params, secondary_conditions, N=80, t_end=t, output_grid=[t])
    tight = simulate_secondary(params, secondary_conditions, t_end=t, output_grid=[t], rtol=1e-7)
    assert fine.cw_mean[-1] == pytest.approx(base.cw_mean[-1], rel=1e-3)
    assert tight.cw_mean[-1] == pytest.approx(base.cw_mean[-1], rel=1e-3)


def test_csv_export(tmp_path, nominal):
    nominal.to_csv(tmp_path / "s.csv")
    head = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert head == "t [s],T_top [K],T_bottom [K],cw_mean [wt/wt]"
