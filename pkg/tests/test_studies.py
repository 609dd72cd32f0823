import numpy as np
import pytest

from lyopce.distributions import Gaussian, UncertainInput, Uniform
from lyopce.stats import EmpiricalDistribution
from lyopce.studies import (
    HOUR,
    InfeasibleError,
    StudyConfig,
    case_config,
    chance_probability,
    design_min_shelf_temperature,
    minimize_drying_time,
    one_at_a_time_study,
    run_uq_study,
)

SMALL = dict(mc_samples=200, n_times=25, resamples=2000, band_resamples=2000)


@pytest.fixture(scope="module")
def a2_small():
    return run_uq_study(case_config("A2", **SMALL))


def test_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(level=1.0)
    with pytest.raises(ValueError):
        StudyConfig(T_b_bounds=(300.0, 290.0))
    with pytest.raises(ValueError):
        StudyConfig(method="qmc")
    with pytest.raises(ValueError):
        case_config("C1")


def test_config_dict_round_trip():
    cfg = case_config("A1", seed=5)
    assert StudyConfig.from_dict(cfg.to_dict()) == cfg


def test_case_presets():
    assert [i.name for i in case_config("A1").inputs] == ["h", "R0", "R1"]
    assert [i.name for i in case_config("A2").inputs] == ["cw_0", "f_a", "h"]
    assert case_config("B2").T_b_bounds == (273.0, 295.0)


def test_uq_shapes_and_ordering(a2_small):
    r = a2_small
    assert set(r.series) == {"pce", "mc"}
    for series in r.series.values():
        for s in series:
            assert s.mean.shape == (25,)
            assert np.all(s.lo <= s.hi)
    assert set(r.ks) == {"T_product", "cw_mean"}
    assert r.surrogate is not None and r.surrogate.n_outputs == 50


def test_uq_initial_node(a2_small):
    # at t_0 the concentration is exactly the cw_0 distribution
    s = a2_small.series["mc"][1]
    assert s.mean[0] == pytest.approx(0.088, abs=0.004)
    assert s.hi[0] - s.lo[0] == pytest.approx(2 * 1.96 * 0.018, rel=0.15)


def test_uq_concentration_decreases(a2_small):
    assert np.all(np.diff(a2_small.series["pce"][1].mean) < 0)


def test_zero_width_inputs_give_zero_band():
    inputs = (UncertainInput("h", Gaussian(15.0, 0.0)), UncertainInput("R0", Uniform(1.5e4, 1.5e4)))
    r = run_uq_study(case_config("A1", inputs=inputs, **SMALL))
    for series in r.series.values():
        for s in series:
            np.testing.assert_array_equal(s.lo, s.hi)


def test_one_at_a_time_pins_others():
    cfg = case_config("A2", **SMALL)
    r = one_at_a_time_study(cfg, "h")
    assert r.surrogate.inputs[0].name == "h" and len(r.surrogate.inputs) == 1
    with pytest.raises(ValueError):
        one_at_a_time_study(cfg, "R0")


def test_one_at_a_time_ranking():
    cfg = case_config("A2", method="pce", n_times=25)
    width = {
        i.name: (lambda s: s.hi[-1] - s.lo[-1])(one_at_a_time_study(cfg, i.name).series["pce"][1])
        for i in cfg.inputs
    }
    assert width["f_a"] > width["cw_0"] > width["h"]
    # initial concentration matters early and fades
    early = one_at_a_time_study(cfg, "cw_0").series["pce"][1]
    assert early.hi[-1] - early.lo[-1] < 0.1 * (early.hi[0] - early.lo[0])


def test_uq_deterministic():
    cfg = case_config("A1", method="pce", n_times=10, resamples=2000, band_resamples=2000)
    a, b = run_uq_study(cfg), run_uq_study(cfg)
    assert np.array_equal(a.series["pce"][0].hi, b.series["pce"][0].hi)


def test_uq_write(tmp_path, a2_small):
    a2_small.write(tmp_path)
    names = {p.name for p in tmp_path.iterdir()}
    assert {"series_pce.csv", "series_mc.csv", "final_mc.csv", "summary.json",
            "timings.json", "surrogate.json"} <= names  # fmt: skip
    head = (tmp_path / "series_mc.csv").read_text().splitlines()[0]
    assert head.startswith("t [s],T_product_mean [K]")


def test_chance_probability_edges():
    d = EmpiricalDistribution.from_samples(np.arange(1.0, 101.0))
    assert chance_probability(d, 0.5) == 0.0
    assert chance_probability(d, 1000.0) == 1.0
    assert abs(chance_probability(d, np.median(d.samples)) - 0.5) <= 1 / d.n


def _quick(case, **kw):
    return case_config(case, scan_points=3, resamples=5000, band_resamples=2000, **kw)


def test_design_zero_target_returns_lower_bound():
    res = design_min_shelf_temperature(_quick("B1", probability=0.0))
    assert res.T_b == 290.0


def test_design_infeasible_reports_endpoints():
    cfg = _quick("B1", T_b_bounds=(280.0, 285.0), target_time=HOUR)
    with pytest.raises(InfeasibleError) as err:
        design_min_shelf_temperature(cfg)
    assert len(err.value.report["probability"]) == 2


def test_design_brackets_to_tolerance():
    res = design_min_shelf_temperature(_quick("B1"))
    assert res.chance.probability >= 0.95
    below = [p for T, p in res.scan if T < res.T_b and T > res.T_b - 0.2]
    assert all(p < 0.95 for p in below)


def test_design_monotone_in_probability_target():
    answers = [design_min_shelf_temperature(_quick("B1", probability=p)).T_b
               for p in (0.5, 0.8, 0.95)]  # fmt: skip
    assert answers == sorted(answers)


def test_optimize_immediately_feasible():
    inputs = (UncertainInput("cw_0", Uniform(0.001, 0.005)),)
    res = minimize_drying_time(_quick("B2", inputs=inputs, probability=0.5))
    assert res.t_f == 0.0


def test_optimize_infeasible_horizon():
    with pytest.raises(InfeasibleError):
        minimize_drying_time(_quick("B2", t_end=HOUR))


def test_optimize_achieves_target():
    res = minimize_drying_time(_quick("B2"))
    assert res.T_b == 295.0
    assert res.chance.probability >= 0.95
    # just below the optimum the constraint is not yet met
    earlier = [p for t, p in res.history if res.t_f - 0.011 * HOUR < t < res.t_f]
    assert all(p < 0.95 for p in earlier)
