"""Reading prices, emissions and summaries back out of a solved power LP."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..solver import LpSolution
from .model import balance_row, cap_var, gen_var, sunk_cost
from .types import PowerCatalog, PowerSolutionSummary, PowerSystemInstance


class MissingRowError(KeyError):
    """The solution has no dual for an expected balance row."""


class NotOptimalError(ValueError):
    pass


def _require_optimal(solution: LpSolution) -> None:
    if not solution.optimal:
        raise NotOptimalError(f"power solution is {solution.status}, not optimal")


def extract_hourly_prices(solution: LpSolution, instance: PowerSystemInstance) -> dict[str, np.ndarray]:
    """Wholesale price (£/MWh) per region and modelled hour from the balance duals."""
    _require_optimal(solution)
    w = instance.calendar.hour_weight
    out = {}
    for r in instance.regions:
        prices = np.empty(instance.n_hours)
        for h in range(instance.n_hours):
            name = balance_row(r, h)
            try:
                prices[h] = solution.duals[name] / w[h]
            except KeyError:
                raise MissingRowError(f"no balance row {name!r} in the solution") from None
        out[r] = prices + 0.0
    return out


def annual_energy(solution: LpSolution, instance: PowerSystemInstance, catalog: PowerCatalog) -> dict[str, float]:
    """Weighted annual generation (MWh) per technology."""
    w = instance.calendar.hour_weight
    out = {}
    for g in catalog.generation:
        out[g.name] = sum(
            w[h] * solution.values.get(gen_var(g.name, r, h), 0.0) for r in instance.regions for h in range(instance.n_hours)
        )
    return out


def emission_intensity(energy_mwh: dict[str, float], catalog: PowerCatalog,
                       supplied_mwh: float | None = None) -> tuple[float, float]:
    """(Mt CO2, g/kWh) for a {technology: MWh} mix.

    The intensity denominator defaults to total generation.
    """
    kg = sum(catalog.tech(name).carbon_intensity * mwh for name, mwh in energy_mwh.items())
    denom = sum(energy_mwh.values()) if supplied_mwh is None else supplied_mwh
    return kg / 1e9, (kg / denom if denom > 0 else 0.0)


@dataclass(frozen=True)
class EmissionReport:
    megatonnes: float
    intensity: float  # g/kWh of annual demand


def compute_emissions(solution: LpSolution, instance: PowerSystemInstance, catalog: PowerCatalog) -> EmissionReport:
    _require_optimal(solution)
    w = instance.calendar.hour_weight
    demand = float(w @ instance.total_demand())
    mt, intensity = emission_intensity(annual_energy(solution, instance, catalog), catalog, demand)
    return EmissionReport(mt, intensity)


def hourly_balance_residual(solution: LpSolution, instance: PowerSystemInstance, catalog: PowerCatalog) -> np.ndarray:
    """supply - demand - net storage - net interchange per (region, hour), from primal values only."""
    v = solution.values
    H = instance.n_hours
    out = np.zeros((len(instance.regions), H))
    for i, r in enumerate(instance.regions):
        d = instance.demand(r)
        for h in range(H):
            s = sum(v.get(gen_var(g.name, r, h), 0.0) for g in catalog.generation)
            s += sum(v.get(f"discharge[{st.name},{r},{h}]", 0.0) - v.get(f"charge[{st.name},{r},{h}]", 0.0)
                     for st in catalog.storage)
            for link in instance.links:
                f = v.get(f"flow[{link.name},{h}]", 0.0)
                if link.region_a == r:
                    s -= f
                if link.region_b == r:
                    s += f
            s += v.get(f"icin[{r},{h}]", 0.0) - v.get(f"icout[{r},{h}]", 0.0) + v.get(f"shed[{r},{h}]", 0.0)
            out[i, h] = s - d[h]
    return out


def summarise(solution: LpSolution, instance: PowerSystemInstance, catalog: PowerCatalog) -> PowerSolutionSummary:
    _require_optimal(solution)
    v = solution.values
    w = instance.calendar.hour_weight
    H = instance.n_hours
    regions = instance.regions
    by_region = {}
    for tech in [g.name for g in catalog.generation] + [s.name for s in catalog.storage]:
        for r in regions:
            by_region[tech, r] = v.get(cap_var(tech, r), 0.0) / 1000.0
    capacity = {}
    for (tech, _), gw in by_region.items():
        capacity[tech] = capacity.get(tech, 0.0) + gw
    energy = {k: mwh / 1e6 for k, mwh in annual_energy(solution, instance, catalog).items()}

    def weighted(prefix, name):
        return sum(w[h] * v.get(f"{prefix}[{name},{r},{h}]", 0.0) for r in regions for h in range(H)) / 1e6

    charge = sum(weighted("charge", s.name) for s in catalog.storage)
    discharge = sum(weighted("discharge", s.name) for s in catalog.storage)
    shed = sum(w[h] * v.get(f"shed[{r},{h}]", 0.0) for r in regions for h in range(H)) / 1e6
    emissions = compute_emissions(solution, instance, catalog)
    prices = extract_hourly_prices(solution, instance)
    time_mean = float(np.mean([np.average(p, weights=w) for p in prices.values()])) if prices else 0.0
    # load-weighted: what an average MWh of demand pays
    served = {r: w * instance.demand(r) for r in prices}
    total_served = sum(float(x.sum()) for x in served.values())
    mean_price = sum(float(served[r] @ prices[r]) for r in prices) / total_served if total_served > 0 else time_mean

    def series_twh(table):
        return sum(float(w @ np.asarray(table[r], float)) for r in table) / 1e6

    demand = {
        "baseline": series_twh(instance.baseline_demand),
        "heat": series_twh(instance.heat_electric_demand),
        "hydrogen_production": series_twh(instance.h2_electric_demand),
    }
    demand["total"] = sum(demand.values())
    h2_used = sum(g.heat_rate * energy[g.name] for g in catalog.generation if g.hydrogen_fuelled)
    return PowerSolutionSummary(
        period=instance.period,
        capacity_gw=capacity,
        capacity_by_region_gw=by_region,
        energy_twh=energy,
        battery_gw=sum(capacity[s.name] for s in catalog.storage),
        battery_charge_twh=charge,
        battery_discharge_twh=discharge,
        emissions_mt=emissions.megatonnes,
        intensity_g_per_kwh=emissions.intensity,
        prices=prices,
        mean_price=mean_price,
        time_mean_price=time_mean,
        total_cost=solution.objective - sunk_cost(instance, catalog),
        demand_twh=demand,
        shed_twh=shed,
        hydrogen_used_twh=h2_used,
    )


def prices_frame(prices: dict[str, np.ndarray]) -> pd.DataFrame:
    rows = [(h, r, float(p)) for r, series in prices.items() for h, p in enumerate(series)]
    return pd.DataFrame(rows, columns=["hour", "region", "price"])


def write_prices_csv(prices: dict[str, np.ndarray], path: str | Path) -> Path:
    path = Path(path)
    prices_frame(prices).to_csv(path, index=False, float_format="%.6f")
    return path


def summary_frame(summary: PowerSolutionSummary) -> pd.DataFrame:
    rows = []
    for tech, gw in sorted(summary.capacity_gw.items()):
        rows.append((summary.period, tech, gw, summary.energy_twh.get(tech, 0.0)))
    return pd.DataFrame(rows, columns=["period", "technology", "capacity_gw", "energy_twh"])
