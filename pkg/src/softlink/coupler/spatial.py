"""Cell-to-region aggregation and rebuilding hourly power-side demands."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd

from ..rtn.types import ELECTRIC_MODES, HEAT_MODES, HYDROGEN_MODES, HeatSupplyMix, HydrogenPlan
from ..timeslice import N_SLICES, TimeSliceCalendar


class UnmappedCellError(KeyError):
    pass


class MissingShareError(KeyError):
    pass


@dataclass(frozen=True)
class RegionMapping:
    cell_region: Mapping[str, str]

    @classmethod
    def from_cells(cls, cells) -> "RegionMapping":
        return cls({c.id: c.region for c in cells if not c.offshore})

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.cell_region.values()))

    def region(self, cell: str) -> str:
        try:
            return self.cell_region[cell]
        except KeyError:
            raise UnmappedCellError(f"cell {cell} has no region") from None

    def problems(self, cells=(), regions=()) -> list[str]:
        out = [f"cell {c.id} is not mapped to a region" for c in cells
               if not c.offshore and c.id not in self.cell_region]
        covered = set(self.cell_region.values())
        out += [f"region {r} has no cells" for r in regions if r not in covered]
        return out


def _map_column(frame: pd.DataFrame, column: str, mapping: RegionMapping, keep_unmapped: bool) -> pd.Series:
    def f(cell):
        if keep_unmapped and cell not in mapping.cell_region:
            return cell
        return mapping.region(cell)
    return frame[column].map(f)


def aggregate_mix(mix: HeatSupplyMix, mapping: RegionMapping) -> HeatSupplyMix:
    """Demand-weighted mean shares per region (plain mean where the region has no demand)."""
    t = mix.table.copy()
    t["location"] = _map_column(t, "location", mapping, keep_unmapped=False)
    t["weighted"] = t.share * t.demand_gwh
    keys = ["period", "location", "sector", "slice", "mode"]
    g = t.groupby(keys, sort=True)
    out = g.agg(weighted=("weighted", "sum"), demand_gwh=("demand_gwh", "sum"),
                mean=("share", "mean")).reset_index()
    # each cell repeats its demand on every mode row, so the group demand is per key already
    out["share"] = np.where(out.demand_gwh > 0, out.weighted / out.demand_gwh.where(out.demand_gwh > 0, 1.0),
                            out["mean"])
    return HeatSupplyMix(out[list(HeatSupplyMix.COLUMNS)].reset_index(drop=True))


def aggregate_plan(plan: HydrogenPlan, mapping: RegionMapping) -> HydrogenPlan:
    """Region totals; offshore cells without a region keep their own id."""
    def summed(frame, cell_col, keys, values):
        if frame.empty:
            return frame.copy()
        f = frame.copy()
        f[cell_col] = _map_column(f, cell_col, mapping, keep_unmapped=True)
        return f.groupby(keys, sort=True)[values].sum().reset_index()[list(frame.columns)]

    pipes = plan.pipelines.copy()
    flows = plan.flows.copy()
    if not pipes.empty:
        for col in ("cell_a", "cell_b"):
            pipes[col] = _map_column(pipes, col, mapping, keep_unmapped=True)
    if not flows.empty:
        for col in ("from_cell", "to_cell"):
            flows[col] = _map_column(flows, col, mapping, keep_unmapped=True)
    return HydrogenPlan(
        production=summed(plan.production, "cell", ["period", "technology", "cell"],
                          ["units_built", "units_total", "capacity_gw"]),
        storage=summed(plan.storage, "cell", ["period", "asset", "cell"], ["units_built", "units_total", "capacity_gwh"]),
        pipelines=pipes,
        dispatch=summed(plan.dispatch, "cell", ["period", "technology", "cell", "slice"], ["output_mw", "electricity_mw"]),
        flows=flows,
        headroom=plan.headroom,
        marginal_cost=plan.marginal_cost,
    )


def aggregate_cells_to_regions(plan: HydrogenPlan, mix: HeatSupplyMix,
                               mapping: RegionMapping) -> tuple[HydrogenPlan, HeatSupplyMix]:
    return aggregate_plan(plan, mapping), aggregate_mix(mix, mapping)


@dataclass(frozen=True, eq=False)
class PowerDemands:
    """Hourly MW per region rebuilt from a heat mix and hydrogen plan."""

    heat_electric: dict[str, np.ndarray]
    h2_electric: dict[str, np.ndarray]
    h2_heat: dict[str, np.ndarray]  # MW of H2 burnt in boilers
    heat_served: dict[str, np.ndarray]  # MW of heat covered by the mix


def _share_cube(mix: HeatSupplyMix, period: int, locations, sectors) -> dict[tuple[str, str], np.ndarray]:
    t = mix.table[mix.table.period == period]
    cube = {}
    for (loc, sec), grp in t.groupby(["location", "sector"]):
        arr = np.full((N_SLICES, len(HEAT_MODES)), np.nan)
        arr[grp.slice.to_numpy(int), [HEAT_MODES.index(m) for m in grp["mode"]]] = grp.share.to_numpy(float)
        cube[loc, sec] = np.nan_to_num(arr, nan=0.0)
        present = np.zeros(N_SLICES, bool)
        present[grp.slice.to_numpy(int)] = True
        if not present.all():
            raise MissingShareError(f"mix for {period}, {loc}, {sec} lacks slices {np.flatnonzero(~present).tolist()}")
    for key in ((loc, sec) for loc in locations for sec in sectors):
        if key not in cube:
            raise MissingShareError(f"mix has no shares for period {period}, {key[0]}, {key[1]}")
    return cube


def reconstruct_power_demands(mix: HeatSupplyMix, plan: HydrogenPlan, heat_demand: Mapping[tuple[str, str], np.ndarray],
                              cop, calendar: TimeSliceCalendar, period: int,
                              boiler_efficiency: float = 0.9) -> PowerDemands:
    """Hourly electric and hydrogen loads implied by a region-level mix and plan.

    ``heat_demand`` maps (region, sector) to hourly MW of heat. ``cop`` is an
    hourly array, or a mapping from electric mode to hourly arrays.
    """
    H = calendar.n_hours
    cops = {m: cop for m in ELECTRIC_MODES} if not isinstance(cop, Mapping) else dict(cop)
    for m in ELECTRIC_MODES:
        arr = np.asarray(cops[m], float)
        if arr.shape != (H,):
            raise ValueError(f"COP series for {m} has {arr.size} values, expected {H}")
        if np.any(arr <= 0):
            raise ValueError("COP must be > 0")
        cops[m] = arr
    if not 0 < boiler_efficiency <= 1:
        raise ValueError("boiler efficiency must lie in (0, 1]")
    regions = sorted({r for r, _ in heat_demand})
    sectors = sorted({s for _, s in heat_demand})
    cube = _share_cube(mix, period, regions, sectors)
    hs = calendar.hour_slice
    idx = {m: HEAT_MODES.index(m) for m in HEAT_MODES}
    elec = {r: np.zeros(H) for r in regions}
    h2 = {r: np.zeros(H) for r in regions}
    served = {r: np.zeros(H) for r in regions}
    for (r, sec), heat in heat_demand.items():
        heat = np.asarray(heat, float)
        if heat.shape != (H,):
            raise ValueError(f"heat demand {r}/{sec} has {heat.size} values, expected {H}")
        shares = cube[r, sec][hs]  # hours x modes
        for m in ELECTRIC_MODES:
            elec[r] += heat * shares[:, idx[m]] / cops[m]
        for m in HYDROGEN_MODES:
            h2[r] += heat * shares[:, idx[m]] / boiler_efficiency
        served[r] += heat * shares.sum(axis=1)

    prod = {r: np.zeros(H) for r in regions}
    d = plan.dispatch
    if not d.empty:
        d = d[d.period == period]
        for r, grp in d.groupby("cell"):
            per_slice = np.bincount(grp.slice.to_numpy(int), weights=grp.electricity_mw.to_numpy(float),
                                    minlength=N_SLICES)
            prod.setdefault(r, np.zeros(H))
            prod[r] = prod[r] + per_slice[hs]
    return PowerDemands(elec, prod, h2, served)
