import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtn_toys import (
    ASHP, CAVERN, CO2_OFF, CO2_ON, GAS_BOILER, H2_BOILER, H2_PIPE, HYBRID, PERIODS, SMR, VESSEL, WELL, Cell,
    cell, edge, flat_prices, instance, profile,
)
from softlink.rtn import (
    ConversionTechnology, MissingPriceError, build_rtn_model, co2_diagnostics, discounting, emission_caps,
    extract_heat_mix, extract_hydrogen_plan, npv, write_heat_mix_csv, write_plan_csvs,
)
from softlink.rtn.results import (
    NoIncumbentError, audit_build_rate, audit_co2, audit_emissions, audit_resource_balance, cavern_levels,
)
from softlink.solver import MipSolution, SolverConfig, solve_lp, solve_mip
from softlink.timeslice import N_SLICES, slice_index

HIGHS = SolverConfig(backend="highs")
ELECTROLYSER = ConversionTechnology("electrolyser", 0.5, {p: 400.0 for p in PERIODS}, electricity=1.5)


def solve(inst, price=100.0, gap=1e-4):
    prices = flat_prices(inst, price) if np.isscalar(price) else price
    sol = solve_mip(build_rtn_model(inst, prices), gap, HIGHS)
    assert sol.has_incumbent, sol.status
    return sol


def smr_network(caps=None, conversion=(SMR,), **kw):
    cells = (cell(cavern=True), Cell("sea", 0.0, 0.0, "r", offshore=True))
    return instance(cells=cells, heat=(GAS_BOILER, H2_BOILER, ASHP, HYBRID), conversion=conversion,
                    storage=(CAVERN, VESSEL, WELL), pipelines=(H2_PIPE, CO2_ON, CO2_OFF),
                    edges=(edge("a", "sea", 100.0, True),), caps=caps, legacy_gas_survival={2030: 1.0}, **kw)


# closed-form helpers

def test_emission_caps_linear_from_baseline():
    assert emission_caps(90.0) == pytest.approx({2030: 60.0, 2040: 30.0, 2050: 0.0}, abs=1e-12)
    assert emission_caps(0.0) == {2030: 0.0, 2040: 0.0, 2050: 0.0}


@given(st.floats(0.0, 1e4))
def test_final_cap_always_zero(baseline):
    caps = emission_caps(baseline)
    assert caps[2050] == 0.0
    assert caps[2030] >= caps[2040] >= caps[2050]


def test_npv_cases():
    assert npv([1.0, 2.0, 3.0], 0.0) == 6.0
    assert npv([0.0, 100.0], 0.035) == pytest.approx(100 * 1.035 ** -10)
    assert npv([0.0, 100.0], 0.035) == pytest.approx(70.89, abs=5e-3)
    assert npv([0.0, 0.0, 0.0], 0.05) == 0.0
    with pytest.raises(ValueError):
        npv([1.0], -0.01)


def test_discounting_annual_is_sum_of_yearly_factors():
    inst = instance()
    d = discounting(inst)
    assert d.factor(2030) == 1.0
    assert d.annual(2040) == pytest.approx(sum(1.035 ** -(10 + t) for t in range(10)))


# model structure

def test_missing_price_is_reported():
    inst = instance()
    prices = flat_prices(inst)
    del prices[2040]
    with pytest.raises(MissingPriceError, match="2040"):
        build_rtn_model(inst, prices)
    prices = flat_prices(inst)
    prices[2030]["r"] = prices[2030]["r"][:15]
    with pytest.raises(MissingPriceError):
        build_rtn_model(inst, prices)


def test_disconnected_co2_producer_diagnostic():
    inst = instance(cells=(cell(), Cell("sea", 0, 0, "r", offshore=True)), conversion=(SMR,), storage=(WELL,),
                    pipelines=(CO2_OFF,))
    assert co2_diagnostics(inst) == ["cell a: CO2 producer has no path to an injection cell"]
    assert co2_diagnostics(smr_network()) == []


def test_reformer_opex_tracks_seasonal_gas_price():
    # the gas import cost per MWh of H2 differs by the gas-price delta times the gas coefficient
    inst = smr_network()
    mip = build_rtn_model(inst, flat_prices(inst))
    n_s = inst.slice_hours
    cost = {v.name: v.cost for v in mip.lp.variables}
    ann = discounting(inst).annual(2030) * 1e-6
    w, s = slice_index("winter", "day"), slice_index("summer", "day")
    per_mwh = {k: cost[f"import[gas,a,{k},2030]"] / (n_s[k] * ann) for k in (w, s)}
    assert per_mwh[w] == pytest.approx(17.71)
    assert per_mwh[s] == pytest.approx(15.81)
    delta = (per_mwh[w] - per_mwh[s]) * SMR.gas
    assert delta == pytest.approx((17.71 - 15.81) * 1.30)
    # the reformer draws exactly its gas coefficient from the cell's gas balance
    row = {c.name: dict(c.coeffs) for c in mip.lp.constraints}[f"gas[a,{w},2030]"]
    assert row[f"prod[smr,a,{w},2030]"] == -SMR.gas


def test_build_rate_row_is_80_gw_per_period():
    mip = build_rtn_model(smr_network(), flat_prices(smr_network()))
    rows = {c.name: c for c in mip.lp.constraints}
    assert rows["build_rate[2040]"].rhs == 80.0
    assert dict(rows["build_rate[2040]"].coeffs)["units[smr,a,2040]"] == 0.5
    assert "units[smr,a,2030]" in mip.integer


# solved toys

def test_single_cell_ashp_only():
    inst = instance(heat=(ASHP,))
    sol = solve(inst)
    mix = extract_heat_mix(sol, inst)
    assert mix.closure_error() < 1e-6
    for p in PERIODS:
        assert np.allclose(mix.shares(p, "a", "domestic", "ashp"), 1.0)
    # capacity sized to the largest slice load
    peak = max(np.max(inst.cells[0].demand("domestic", p) * 1000 / inst.slice_hours) for p in PERIODS)
    assert sol[f"heatcap[ashp,a,domestic,2030]"] == pytest.approx(peak, rel=1e-6)
    assert extract_hydrogen_plan(sol, inst).is_empty


def test_zero_cap_with_only_smr_forces_h2_out_in_final_period():
    inst = smr_network(caps=emission_caps(0.5))
    sol = solve(inst, 250.0)
    mix = extract_heat_mix(sol, inst)
    for sec in ("domestic", "commercial"):
        assert np.allclose(mix.shares(2050, "a", sec, "h2_boiler") + mix.shares(2050, "a", sec, "hybrid_h2"), 0.0,
                           atol=1e-7)
        assert np.allclose(mix.shares(2050, "a", sec, "gas_boiler"), 0.0, atol=1e-9)
    # with expensive power the reformer route is used before the cap closes
    assert mix.shares(2040, "a", "domestic", "h2_boiler").max() > 0.5
    audit = audit_emissions(sol, inst)
    for p, cap in inst.emissions.caps.items():
        assert audit[p] <= cap + 1e-6


def test_peak_overflow_from_h2_boiler_halves_the_mix():
    # flat load, doubled on the peak day: heat pumps cover the base, boilers top up the peak
    flat = np.ones(N_SLICES)
    flat[slice_index("winter_peak", "night"):slice_index("winter_peak", "night") + 4] = 2.0
    demand = {("domestic", p): profile(800.0, flat) for p in PERIODS}
    demand.update({("commercial", p): profile(200.0, flat) for p in PERIODS})
    small = ConversionTechnology("electrolyser", 0.1, {p: 100.0 for p in PERIODS}, electricity=1.5)
    heat = (replace(ASHP, capex=412.0), replace(H2_BOILER, capex=48.0))
    inst = instance(cells=(Cell("a", 0, 0, "r", demand),), heat=heat, conversion=(small,))
    sol = solve(inst, 80.0)
    mix = extract_heat_mix(sol, inst)
    for k in range(4):
        s = slice_index("winter_peak", "night") + k
        assert mix.share(2030, "a", "domestic", s, "ashp") == pytest.approx(0.5, abs=1e-6)
        assert mix.share(2030, "a", "domestic", s, "h2_boiler") == pytest.approx(0.5, abs=1e-6)
    assert mix.share(2030, "a", "domestic", slice_index("summer", "day"), "ashp") == pytest.approx(1.0)


def test_hybrid_running_electric_has_no_h2_share():
    inst = instance(heat=(HYBRID,), conversion=(ELECTROLYSER,))
    sol = solve(inst, 1.0)
    mix = extract_heat_mix(sol, inst)
    off_peak = slice_index("summer", "night")
    assert mix.share(2030, "a", "domestic", off_peak, "hybrid_elec") == pytest.approx(1.0)
    assert mix.share(2030, "a", "domestic", off_peak, "hybrid_h2") == pytest.approx(0.0, abs=1e-9)


def test_single_unit_capacity_is_integer_multiple():
    one_gw = ConversionTechnology("smr1", 1.0, {p: 250.0 for p in PERIODS}, gas=1.3, electricity=0.02,
                                  co2_captured=0.22)
    small = Cell("a", 0, 0, "r", {("domestic", p): profile(600.0) for p in PERIODS}, cavern=True)
    inst = instance(cells=(small, Cell("sea", 0, 0, "r", offshore=True)), heat=(H2_BOILER,), conversion=(one_gw,),
                    storage=(WELL,), pipelines=(CO2_OFF,), edges=(edge("a", "sea", 80.0, True),))
    sol = solve(inst)
    plan = extract_hydrogen_plan(sol, inst, flat_prices(inst))
    assert plan.capacity_gw(2030) == {"smr1": 1.0}
    assert set(plan.production.units_total) == {1}
    # dispatch never exceeds installed capacity
    assert (plan.dispatch.output_mw <= 1000.0 + 1e-6).all()
    assert np.all(plan.headroom[2030] >= 0)
    assert np.isfinite(plan.marginal_cost[2030]).all()


def test_two_cells_share_production_through_a_pipeline():
    demand = {("domestic", p): profile(400.0) for p in PERIODS}
    cells = (Cell("a", 0, 0, "r", demand), Cell("b", 1, 0, "r", demand))
    prod_only_a = ConversionTechnology("electrolyser", 0.5, {p: 400.0 for p in PERIODS}, electricity=1.5)
    inst = instance(cells=cells, heat=(H2_BOILER,), conversion=(prod_only_a,), pipelines=(H2_PIPE,),
                    edges=(edge("a", "b", 30.0),))
    sol = solve(inst)
    plan = extract_hydrogen_plan(sol, inst)
    assert len(plan.production.cell.unique()) == 1
    assert len(plan.pipelines[plan.pipelines.carrier == "h2"]) >= 1
    assert (plan.flows.resource == "h2").any()
    # every flow sits within the built capacity of its segment
    for f in plan.flows.itertuples():
        seg = plan.pipelines[(plan.pipelines.period == f.period)]
        assert f.flow <= seg.capacity.sum() + 1e-6


def test_conservation_audits_on_network_toy():
    inst = smr_network(caps=emission_caps(0.5))
    sol = solve(inst, 250.0)
    assert audit_resource_balance(sol, inst) < 1e-6
    for p, (captured, injected, lost) in audit_co2(sol, inst).items():
        assert captured == pytest.approx(injected + lost, abs=1e-9, rel=1e-7)
    for gw in audit_build_rate(sol, inst).values():
        assert gw <= 80.0 + 1e-9
    levels = cavern_levels(sol, inst, "a", 2040)
    assert set(levels) == {"winter", "winter_peak", "spring", "summer", "autumn"}
    assert min(levels.values()) >= -1e-6
    mix = extract_heat_mix(sol, inst)
    assert mix.closure_error() < 1e-6
    assert mix.table.share.between(0, 1).all()


def test_relaxation_bounds_the_incumbent():
    inst = smr_network(caps=emission_caps(0.5))
    mip = build_rtn_model(inst, flat_prices(inst, 250.0))
    relaxed = solve_lp(mip.lp, HIGHS)
    sol = solve_mip(mip, 1e-4, HIGHS)
    assert relaxed.objective <= sol.objective + 1e-6


def test_build_rate_binds_when_tightened():
    fine = replace(SMR, unit_capacity=0.01)
    inst = smr_network(build_rate=0.01, caps=emission_caps(0.5), conversion=(fine,))
    sol = solve(inst, 250.0)
    assert audit_build_rate(sol, inst)[2040] == pytest.approx(0.01 * 10)
    relaxed = solve_lp(build_rtn_model(inst, flat_prices(inst, 250.0)).lp, HIGHS)
    # loosening the limit lowers cost: the row's dual is negative in a min problem
    assert relaxed.duals["build_rate[2040]"] < 0


def test_extract_rejects_missing_incumbent():
    with pytest.raises(NoIncumbentError):
        extract_heat_mix(MipSolution("infeasible"), instance())


def test_csv_writers(tmp_path):
    inst = smr_network(caps=emission_caps(0.5))
    sol = solve(inst, 250.0)
    path = write_heat_mix_csv(extract_heat_mix(sol, inst), tmp_path / "mix.csv")
    assert path.read_text().splitlines()[0] == "period,location,sector,slice,mode,share,demand_gwh"
    files = write_plan_csvs(extract_hydrogen_plan(sol, inst), tmp_path)
    assert [f.name for f in files] == ["h2_production.csv", "h2_storage.csv", "h2_pipelines.csv",
                                       "h2_dispatch.csv", "h2_flows.csv"]
    assert "cell_a,cell_b" in files[2].read_text()


@settings(max_examples=15, deadline=None)
@given(st.floats(20.0, 400.0), st.floats(100.0, 3000.0))
def test_mix_closure_property(price, annual):
    inst = instance(cells=(cell(annual_gwh=annual),), heat=(GAS_BOILER, ASHP, H2_BOILER, HYBRID),
                    conversion=(ELECTROLYSER,), legacy_gas_survival={2030: 0.5})
    sol = solve(inst, price, gap=1e-3)
    mix = extract_heat_mix(sol, inst)
    assert mix.closure_error() < 1e-6
    assert audit_resource_balance(sol, inst) < 1e-6
    assert math.isclose(mix.table.share.min(), max(0.0, mix.table.share.min()))
