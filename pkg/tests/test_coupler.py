import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from softlink.coupler import (
    CONVERGED, FAILED, MAX_ITERATIONS, KeyMismatchError, NegativePriceError, RegionMapping, RetailTransform,
    aggregate_mix, aggregate_plan, aggregate_to_slices, clamp_negative, electrified_mix, expand_slices, price_change,
    reconstruct_power_demands, run_coupled, share_change,
)
from softlink.rtn.types import HEAT_MODES, HeatSupplyMix, HydrogenPlan
from softlink.timeslice import DAILY_PERIODS, N_SLICES, SEASONS, TimeSliceCalendar

from scenario_toys import mini, variant

FULL = TimeSliceCalendar.full_year()
SIX_DAYS = TimeSliceCalendar.representative(
    [("winter", 60), ("winter", 64), ("winter_peak", 1), ("autumn_spring", 85), ("summer", 100), ("summer", 55)])


# retail transform

@pytest.mark.parametrize("wholesale, retail", [(0, 0), (100, 220), (240, 528), (6000, 528), (239.99, 527.978)])
def test_retail_examples(wholesale, retail):
    assert RetailTransform()(wholesale) == pytest.approx(retail, abs=1e-9)


def test_retail_rejects_negative_and_nan():
    with pytest.raises(NegativePriceError):
        RetailTransform()(-1.0)
    with pytest.raises(NegativePriceError):
        RetailTransform()(np.array([1.0, np.nan]))


@given(st.lists(st.floats(0, 1e4), min_size=2, max_size=30))
def test_retail_monotone_and_capped(prices):
    p = np.sort(np.array(prices))
    r = RetailTransform()(p)
    assert np.all(np.diff(r) >= -1e-12)
    assert np.all(r <= 528.0)


def test_clamp_negative():
    np.testing.assert_array_equal(clamp_negative([-5.0, 0.0, 3.0]), [0.0, 0.0, 3.0])


# slice aggregation

def test_constant_series_gives_constant_slices():
    np.testing.assert_allclose(aggregate_to_slices(np.full(8760, 50.0), FULL), np.full(N_SLICES, 50.0))


def test_winter_night_has_868_hours():
    winter_night = SEASONS.index("winter") * len(DAILY_PERIODS)
    assert int(np.sum(FULL.hour_slice == winter_night)) == 868


def test_full_year_matches_groupby_oracle():
    rng = np.random.default_rng(3)
    series = rng.normal(60, 25, 8760)
    hour = np.arange(8760)
    season = np.array(FULL.day_season)[hour // 24]
    bands = pd.cut(hour % 24, bins=[s for _, s, _ in DAILY_PERIODS] + [24], right=False,
                   labels=[n for n, _, _ in DAILY_PERIODS])
    oracle = pd.Series(series).groupby([season, np.asarray(bands)]).mean()
    got = aggregate_to_slices(series, FULL)
    for s_i, s in enumerate(SEASONS):
        for p_i, (name, _, _) in enumerate(DAILY_PERIODS):
            assert got[s_i * 4 + p_i] == pytest.approx(oracle[s, name], rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_aggregation_preserves_hour_weighted_sum(seed):
    series = np.random.default_rng(seed).uniform(-50, 300, SIX_DAYS.n_hours)
    slices = aggregate_to_slices(series, SIX_DAYS)
    w = SIX_DAYS.hour_weight
    assert float(w @ expand_slices(slices, SIX_DAYS)) == pytest.approx(float(w @ series), rel=1e-9)


def test_empty_slice_is_nan_and_length_checked():
    cal = TimeSliceCalendar.representative([("winter", 124), ("winter_peak", 1), ("summer", 240)],
                                           {"winter": 124, "winter_peak": 1, "autumn_spring": 85, "summer": 155})
    out = aggregate_to_slices(np.ones(cal.n_hours), cal)
    spring = SEASONS.index("autumn_spring") * 4
    assert np.isnan(out[spring:spring + 4]).all()
    assert not np.isnan(np.delete(out, range(spring, spring + 4))).any()
    with pytest.raises(ValueError):
        aggregate_to_slices(np.ones(5), cal)


# demand reconstruction

def _mix(shares_by_mode, location="north", period=2030):
    rows = [(period, location, sec, s, m, shares_by_mode.get(m, 0.0), 1.0)
            for sec in ("domestic", "commercial") for s in range(N_SLICES) for m in HEAT_MODES]
    return HeatSupplyMix(pd.DataFrame(rows, columns=list(HeatSupplyMix.COLUMNS)))


def _rebuild(mix, heat, cop=3.04, cal=SIX_DAYS):
    H = cal.n_hours
    return reconstruct_power_demands(mix, HydrogenPlan(), {("north", "domestic"): np.full(H, heat)},
                                     np.full(H, cop), cal, 2030, 0.9)


def test_heat_pump_load_is_heat_over_cop():
    d = _rebuild(_mix({"ashp": 1.0}), 3.04)
    np.testing.assert_allclose(d.heat_electric["north"], 1.0)
    np.testing.assert_allclose(d.h2_heat["north"], 0.0)


def test_hydrogen_boiler_fuel_is_heat_over_efficiency():
    d = _rebuild(_mix({"h2_boiler": 1.0}), 0.9)
    np.testing.assert_allclose(d.h2_heat["north"], 1.0)
    np.testing.assert_allclose(d.heat_electric["north"], 0.0)


def test_zero_heat_gives_zero_loads():
    d = _rebuild(_mix({"ashp": 0.5, "hybrid_h2": 0.5}), 0.0)
    for series in (d.heat_electric, d.h2_heat, d.h2_electric, d.heat_served):
        np.testing.assert_array_equal(series["north"], 0.0)


def test_missing_mix_key_is_an_error():
    with pytest.raises(KeyError):
        reconstruct_power_demands(_mix({"ashp": 1.0}, location="south"), HydrogenPlan(),
                                  {("north", "domestic"): np.ones(SIX_DAYS.n_hours)}, np.full(SIX_DAYS.n_hours, 3.0),
                                  SIX_DAYS, 2030)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=len(HEAT_MODES), max_size=len(HEAT_MODES)).filter(lambda x: sum(x) > 1e-3),
       st.floats(0, 5000), st.floats(1.5, 5))
def test_reconstruction_conserves_heat(raw, heat, cop):
    total = sum(raw)
    shares = {m: x / total for m, x in zip(HEAT_MODES, raw)}
    d = _rebuild(_mix(shares), heat, cop)
    np.testing.assert_allclose(d.heat_served["north"], heat, rtol=1e-9, atol=1e-9)
    elec = shares["ashp"] + shares["hybrid_elec"]
    np.testing.assert_allclose(d.heat_electric["north"], heat * elec / cop, rtol=1e-9, atol=1e-9)


# spatial aggregation

MAPPING = RegionMapping({"a": "north", "b": "north", "c": "south"})


def test_two_equal_cells_average_their_shares():
    both = pd.concat([_mix({"ashp": 1.0}, "a").table, _mix({"gas_boiler": 1.0}, "b").table])
    out = aggregate_mix(HeatSupplyMix(both), RegionMapping({"a": "north", "b": "north"}))
    assert out.share(2030, "north", "domestic", 0, "ashp") == pytest.approx(0.5)
    assert out.share(2030, "north", "domestic", 0, "gas_boiler") == pytest.approx(0.5)
    assert out.closure_error() < 1e-12


def test_demand_weighting():
    a = _mix({"ashp": 1.0}, "a").table.assign(demand_gwh=3.0)
    b = _mix({"gas_boiler": 1.0}, "b").table.assign(demand_gwh=1.0)
    out = aggregate_mix(HeatSupplyMix(pd.concat([a, b])), MAPPING)
    assert out.share(2030, "north", "commercial", 5, "ashp") == pytest.approx(0.75)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcX"), st.sampled_from(["pem_low", "smr_syngas"]),
                          st.integers(0, 9), st.floats(0, 10)), min_size=1, max_size=25))
def test_plan_aggregation_preserves_capacity(rows):
    prod = pd.DataFrame([(2030, t, c, n, n, cap) for c, t, n, cap in rows],
                        columns=["period", "technology", "cell", "units_built", "units_total", "capacity_gw"])
    out = aggregate_plan(HydrogenPlan(production=prod), MAPPING)
    assert out.production.capacity_gw.sum() == pytest.approx(prod.capacity_gw.sum(), rel=1e-12, abs=1e-12)
    assert set(out.production.cell) <= {"north", "south", "X"}
    for tech in prod.technology.unique():
        assert out.capacity_gw(2030)[tech] == pytest.approx(prod[prod.technology == tech].capacity_gw.sum())


# convergence metrics

def test_share_change_examples():
    a, b = _mix({"ashp": 1.0}), _mix({"gas_boiler": 1.0})
    assert share_change(a, a) == 0.0
    assert share_change(a, b) == 1.0
    with pytest.raises(KeyMismatchError):
        share_change(a, _mix({"ashp": 1.0}, "elsewhere"))


def test_price_change_relative_with_floor():
    old = {2030: {"north": np.array([50.0, 0.0])}}
    assert price_change(old, {2030: {"north": np.array([55.0, 0.0])}}) == pytest.approx(0.1)
    assert price_change(old, {2030: {"north": np.array([50.0, 0.5])}}) == pytest.approx(0.5)
    assert price_change(old, {2030: {"north": np.array([50.0, 0.5])}}, floor=0.25) == pytest.approx(2.0)
    with pytest.raises(KeyMismatchError):
        price_change(old, {2040: {"north": np.array([50.0, 0.0])}})


def test_bootstrap_mix_is_all_heat_pumps():
    inst = mini().rtn_instance()
    mix = electrified_mix(inst)
    t = mix.table
    assert set(t.location) == {c.id for c in inst.cells if not c.offshore}
    assert (t[t["mode"] == "ashp"].share == 1.0).all()
    assert mix.closure_error() == 0.0


# loop contract

@pytest.fixture
def two_iterations(mini_run):
    return mini_run


def test_loop_runs_to_the_cap(two_iterations):
    _, state = two_iterations
    assert state.status == MAX_ITERATIONS
    assert [r.iteration for r in state.history] == [1, 2]
    first, second = state.history
    assert math.isinf(first.max_price_change)
    assert math.isfinite(second.max_price_change) and second.max_share_change >= 0


def test_first_iteration_power_sees_full_electrification(two_iterations):
    sc, state = two_iterations
    first = state.history[0]
    w = sc.calendar.hour_weight
    for p in sc.periods:
        cop = sc.hourly_cop()
        cop = cop["ashp"] if isinstance(cop, dict) else cop
        heat = sum(np.asarray(v) for v in sc.hourly_heat_demand(p).values())
        assert first.heat_electric_twh[p] == pytest.approx(float(w @ (heat / cop)) / 1e6, rel=1e-6)


def test_records_carry_prices_and_mix(two_iterations):
    sc, state = two_iterations
    for rec in state.history:
        assert set(rec.retail_prices) == set(sc.periods)
        for p in sc.periods:
            for r in sc.regions:
                assert rec.retail_prices[p][r].shape == (N_SLICES,)
                assert np.all(rec.retail_prices[p][r] <= 528.0 + 1e-9)
        assert rec.mix.closure_error() < 1e-6
        assert rec.rtn_gap <= 1e-3 + 1e-9


def test_loose_threshold_converges_at_second_iteration():
    state = run_coupled(mini(), max_iterations=5, threshold=1e9)
    assert state.status == CONVERGED and state.iteration == 2


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_coupled(mini(), max_iterations=0)
    with pytest.raises(ValueError):
        run_coupled(mini(), threshold=-1)


def test_infeasible_power_model_fails_cleanly():
    base = mini()
    caps = base.tables["power_capacity"].copy()
    caps["max__mw"] = caps["existing__mw"]
    sc = variant(conversion=("smr_syngas",), cells=("N1", "S1", "X1"), power_capacity=caps,
                 manifest={"power": {"value_of_lost_load": None}})
    state = run_coupled(sc, max_iterations=2)
    assert state.status == FAILED
    assert state.history == []
    assert "power model" in state.failure
    assert "Minimize" in state.failed_program or "minimize" in state.failed_program.lower()
