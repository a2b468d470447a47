import math

import numpy as np
import pytest

from power_toys import BARE, BATTERY, CCGT, OCGT, WIND, free_tech, instance, one_day, two_generator, wind_profile
from softlink.power import (
    EmptyCatalogError, InconsistentProfileError, MissingRowError, PowerCatalog, PowerPolicy, adequacy_requirement,
    build_power_model, compute_emissions, emission_intensity, extract_hourly_prices, hourly_balance_residual,
    summarise, write_prices_csv,
)
from softlink.power.types import annuity_factor
from softlink.solver import INFEASIBLE, OPTIMAL, LpSolution, SolverConfig, certify_lp, solve_lp
from softlink.timeslice import TimeSliceCalendar

BUILTIN = SolverConfig(backend="builtin")
HIGHS = SolverConfig(backend="highs")


def solve(inst, cat, cfg=HIGHS):
    lp = build_power_model(inst, cat)
    sol = solve_lp(lp, cfg)
    return lp, sol


def test_balance_rows_named_per_hour():
    inst = instance(100.0)
    lp = build_power_model(inst, PowerCatalog((CCGT, OCGT)))
    names = [c.name for c in lp.constraints if c.name.startswith("balance")]
    assert names == [f"balance[r,{h}]" for h in range(24)]


def test_zero_cap_with_only_gas_is_infeasible():
    inst = instance(100.0, carbon_cap=0.0)
    _, sol = solve(inst, PowerCatalog((CCGT,)))
    assert sol.status == INFEASIBLE


def test_wind_displaces_ccgt_when_sufficient():
    cf = wind_profile(24)
    demand = np.full(24, 500.0)
    inst = instance(demand, capacity_factors={("wind", "r"): cf})
    lp, sol = solve(inst, PowerCatalog((WIND, CCGT)))
    assert sol.optimal
    wind_cap = sol["cap[wind,r]"]
    for h in range(24):
        if cf[h] * wind_cap >= demand[h] - 1e-9:
            assert sol[f"gen[ccgt,r,{h}]"] == pytest.approx(0, abs=1e-6)


@pytest.mark.parametrize("cfg", [BUILTIN, HIGHS], ids=["builtin", "highs"])
def test_two_generator_price(cfg):
    inst, cat = two_generator(15.0)
    lp, sol = solve(inst, cat, cfg)
    prices = extract_hourly_prices(sol, inst)["r"]
    assert sol["gen[cheap,r,0]"] == pytest.approx(10)
    assert sol["gen[dear,r,0]"] == pytest.approx(5)
    assert np.allclose(prices, 50)


def test_free_renewable_marginal_gives_zero_price():
    solar = free_tech("sun", 0.0, renewable=True, profile="sun")
    inst = instance(10.0, capacity_factors={("sun", "r"): np.full(24, 1.0)},
                    existing_capacity={("sun", "r"): 50}, max_capacity={("sun", "r"): 50})
    _, sol = solve(inst, PowerCatalog((solar, free_tech("gas", 40))))
    assert np.allclose(extract_hourly_prices(sol, inst)["r"], 0)


def test_scarcity_price_exceeds_fuel_costs():
    demand = np.full(24, 50.0)
    demand[18] = 500.0
    cat = PowerCatalog((CCGT, OCGT))
    inst = instance(demand, max_capacity={("ccgt", "r"): 200, ("ocgt", "r"): 100},
                    policy=PowerPolicy(adequacy_margin=None, reserve=False, value_of_lost_load=6000))
    _, sol = solve(inst, cat)
    p = extract_hourly_prices(sol, inst)["r"]
    assert p[18] > max(g.variable_cost for g in cat.generation)
    assert p[18] == pytest.approx(6000)


def test_emission_intensity_arithmetic():
    mt, g = emission_intensity({"ccgt": 100_000.0, "wind": 900_000.0}, PowerCatalog((CCGT, WIND)))
    assert g == pytest.approx(31.88)
    assert mt == pytest.approx(100_000 * 318.8 / 1e9)
    assert emission_intensity({"wind": 5.0}, PowerCatalog((WIND,)))[1] == 0


def test_all_renewable_dispatch_has_zero_emissions():
    inst = instance(10.0, capacity_factors={("wind", "r"): np.full(24, 0.5)})
    _, sol = solve(inst, PowerCatalog((WIND,)))
    rep = compute_emissions(sol, inst, PowerCatalog((WIND,)))
    assert rep.megatonnes == 0 and rep.intensity == 0


def test_carbon_cap_binds_when_gas_is_cheaper():
    cf = wind_profile(24, seed=2)
    cat = PowerCatalog((WIND, CCGT))
    inst = instance(1000.0, capacity_factors={("wind", "r"): cf}, carbon_cap=41.0)
    _, sol = solve(inst, cat)
    rep = compute_emissions(sol, inst, cat)
    assert rep.intensity == pytest.approx(41.0, rel=1e-6)
    assert -sol.duals["carbon"] > 0


def test_adequacy_arithmetic():
    firm = free_tech("firm", 1.0, derating=1.0)
    inst = instance(np.full(24, 100_000.0), policy=PowerPolicy(adequacy_margin=0.1))
    req = adequacy_requirement(inst, PowerCatalog((firm, WIND)))
    assert req.requirement == pytest.approx(110_000)
    assert req.firm_contribution({"wind": 50_000}) == pytest.approx(5_000)
    zero = adequacy_requirement(instance(0.0, policy=PowerPolicy(adequacy_margin=0.1)), PowerCatalog((firm,)))
    assert zero.requirement == 0


def test_adequacy_row_binds_on_capacity():
    firm = free_tech("firm", 10.0, derating=0.95)
    firm = type(firm)(**{**firm.__dict__, "capital_cost": 100.0})
    inst = instance(np.full(24, 1000.0), policy=PowerPolicy(adequacy_margin=0.1, reserve=False))
    _, sol = solve(inst, PowerCatalog((firm,)))
    assert sol["cap[firm,r]"] * 0.95 == pytest.approx(1100, rel=1e-6)


def test_summarise_single_hour_capacity_equals_dispatch():
    cal = TimeSliceCalendar.representative([("winter", 1)])
    inst = instance(np.full(24, 70.0), calendar=cal)
    cat = PowerCatalog((CCGT,))
    _, sol = solve(inst, cat)
    s = summarise(sol, inst, cat)
    assert s.capacity_gw["ccgt"] == pytest.approx(0.070)
    assert s.energy_twh["ccgt"] == pytest.approx(70 * 24 / 1e6)


def test_mean_of_constant_price():
    inst, cat = two_generator(15.0)
    _, sol = solve(inst, cat)
    assert summarise(sol, inst, cat).mean_price == pytest.approx(50)


def test_mean_price_is_load_weighted():
    inst, cat = two_generator(np.r_[np.full(12, 5.0), np.full(12, 15.0)])
    _, sol = solve(inst, cat)
    s = summarise(sol, inst, cat)
    assert s.time_mean_price == pytest.approx(35)
    assert s.mean_price == pytest.approx((12 * 5 * 20 + 12 * 15 * 50) / (12 * 20))


def _rich_toy(days=2, seed=0):
    cal = TimeSliceCalendar.representative([("winter", 100), ("summer", 265)][:days])
    H = cal.n_hours
    rng = np.random.default_rng(seed)
    demand = 800 + 300 * np.sin(np.arange(H) * 2 * np.pi / 24) + 50 * rng.random(H)
    inst = instance(demand, calendar=cal, capacity_factors={("wind", "r"): wind_profile(H, seed)},
                    carbon_cap=100.0, policy=PowerPolicy(adequacy_margin=0.1, largest_unit=50.0))
    return inst, PowerCatalog((WIND, CCGT, OCGT), (BATTERY,))


def test_energy_audit_and_storage_cycles():
    inst, cat = _rich_toy()
    lp, sol = solve(inst, cat)
    assert sol.optimal
    assert np.abs(hourly_balance_residual(sol, inst, cat)).max() <= 1e-4
    s = summarise(sol, inst, cat)
    supplied = sum(s.energy_twh.values()) + s.battery_discharge_twh - s.battery_charge_twh
    assert supplied == pytest.approx(s.demand_twh["total"], rel=1e-9)
    assert s.battery_charge_twh * BATTERY.efficiency == pytest.approx(s.battery_discharge_twh, rel=1e-6, abs=1e-9)
    cap = sol["cap[battery,r]"]
    for block in inst.calendar.day_blocks():
        soc = np.array([sol[f"soc[battery,r,{h}]"] for h in block])
        assert soc.min() >= -1e-6 and soc.max() <= BATTERY.duration * cap + 1e-6
        first, last = block[0], block[-1]
        recon = soc[-1] + BATTERY.efficiency * sol[f"charge[battery,r,{first}]"] - sol[f"discharge[battery,r,{first}]"]
        assert recon == pytest.approx(soc[0], abs=1e-6)


def test_full_year_storage_cycles_over_the_year():
    cal = TimeSliceCalendar.representative([("winter", 1), ("summer", 1)])
    inst = instance(np.full(48, 10.0), calendar=cal, policy=PowerPolicy(adequacy_margin=None, reserve=False,
                                                                        battery_cyclic_per_day=False))
    lp = build_power_model(inst, PowerCatalog((CCGT,), (BATTERY,)))
    row = next(c for c in lp.constraints if c.name == "storage[battery,r,0]")
    assert dict(row.coeffs)["soc[battery,r,47]"] == -1


def test_certificates_on_rich_toy():
    inst, cat = _rich_toy(days=1)
    lp, sol = solve(inst, cat, BUILTIN)
    assert sol.optimal
    assert max(certify_lp(lp, sol).values()) <= 1e-6


def test_loosening_carbon_cap_never_raises_cost():
    inst, cat = _rich_toy()
    costs = []
    for cap in (50.0, 100.0, 200.0, None):
        i = type(inst)(**{**inst.__dict__, "carbon_cap": cap})
        costs.append(solve(i, cat)[1].objective)
    assert all(a >= b - 1e-6 * abs(a) for a, b in zip(costs, costs[1:]))


def test_removing_binding_cap_lowers_cost():
    cf = wind_profile(24, seed=2)
    cat = PowerCatalog((WIND, CCGT))
    capped = instance(1000.0, capacity_factors={("wind", "r"): cf}, carbon_cap=41.0)
    free = instance(1000.0, capacity_factors={("wind", "r"): cf})
    assert solve(free, cat)[1].objective <= solve(capped, cat)[1].objective


def test_prices_recover_operating_cost():
    inst, cat = _rich_toy()
    _, sol = solve(inst, cat)
    w = inst.calendar.hour_weight
    p = extract_hourly_prices(sol, inst)["r"]
    revenue = float(np.sum(w * p * inst.demand("r")))
    opex = sum(w[h] * g.variable_cost * sol[f"gen[{g.name},r,{h}]"] for g in cat.generation for h in range(inst.n_hours))
    assert revenue >= opex - 1e-6 * opex


def test_hydrogen_generation_draws_on_budget():
    h2 = free_tech("h2_ocgt", 5.0, hydrogen_fuelled=True, heat_rate=2.0)
    inst = instance(np.full(24, 100.0), hydrogen_supply=np.full(24, 80.0), hydrogen_price=np.full(24, 30.0))
    _, sol = solve(inst, PowerCatalog((h2, free_tech("dear", 500))))
    for h in range(24):
        assert 2.0 * sol[f"gen[h2_ocgt,r,{h}]"] <= 80 + 1e-6
    assert sol["gen[h2_ocgt,r,0]"] == pytest.approx(40)
    no_h2 = instance(np.full(24, 100.0))
    _, sol2 = solve(no_h2, PowerCatalog((h2, free_tech("dear", 500))))
    assert sol2["cap[h2_ocgt,r]"] == 0


def test_interconnector_energy_neutral():
    cal = one_day()
    demand = 100 + 50 * np.sin(np.arange(24) / 4)
    inst = instance(demand, interconnector_capacity={"r": 30.0}, calendar=cal)
    _, sol = solve(inst, PowerCatalog((CCGT, OCGT)))
    net = sum(sol[f"icin[r,{h}]"] - sol[f"icout[r,{h}]"] for h in range(24))
    assert net == pytest.approx(0, abs=1e-6)


def test_profile_length_mismatch_raises():
    inst = instance(np.full(24, 1.0), capacity_factors={("wind", "r"): np.ones(23)})
    with pytest.raises(InconsistentProfileError):
        build_power_model(inst, PowerCatalog((WIND,)))


def test_empty_catalog_raises():
    with pytest.raises(EmptyCatalogError):
        build_power_model(instance(1.0), PowerCatalog(()))


def test_missing_balance_row():
    inst, _ = two_generator(15.0)
    fake = LpSolution(OPTIMAL, 0.0, {}, {"other": 1.0})
    with pytest.raises(MissingRowError):
        extract_hourly_prices(fake, inst)


def test_price_csv_columns(tmp_path):
    path = write_prices_csv({"r": np.array([1.0, 2.0])}, tmp_path / "p.csv")
    assert path.read_text().splitlines()[0] == "hour,region,price"


def test_annuity_factor():
    assert annuity_factor(0.0, 20) == pytest.approx(0.05)
    assert annuity_factor(0.075, 25) == pytest.approx(0.075 / (1 - 1.075 ** -25))
