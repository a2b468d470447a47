"""The Scenario: raw input tables plus the domain objects built from them."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
import pandas as pd

from ..coupler import RegionMapping, RetailTransform
from ..power import (
    GenerationTechnology, PowerCatalog, PowerPolicy, PowerSystemInstance, StorageTechnology, TransferLink,
)
from ..rtn import (
    Cell, ConversionTechnology, Edge, EmissionTrajectory, HeatTechnology, PipelineOption, RtnInstance, RtnSettings,
    StorageAsset, co2_well_rate, emission_caps,
)
from ..timeslice import N_SLICES, SEASON_DAYS, SEASONS, TimeSliceCalendar, slice_index

TRAJECTORY_ANCHORS = {2020: 541.0, 2050: 476.0}  # TWh/yr of heat


def heat_demand_trajectory(year: float, anchors: dict[int, float] | None = None) -> float:
    """Annual heat demand (TWh): linear between the anchor years, flat after the last until 2060."""
    anchors = dict(sorted((anchors or TRAJECTORY_ANCHORS).items()))
    years = list(anchors)
    if not years[0] <= year <= 2060:
        raise ValueError(f"year {year} outside {years[0]}..2060")
    return float(np.interp(year, years, list(anchors.values())))


DEFAULT_MANIFEST: dict[str, Any] = {
    "name": "scenario",
    "base_year": 2020,
    "periods": [2030, 2040, 2050],
    "period_years": 10,
    "calendar": {"season_days": dict(SEASON_DAYS)},
    "heat": {
        "trajectory_twh": {2020: 541.0, 2050: 476.0},
        "sector_split": {"domestic": 0.7, "commercial": 0.3},
        "baseline_emissions_mt": None,
        "emission_zero_year": 2050,
        "boiler_efficiency": 0.9,
    },
    "prices": {"gas": {"winter": 17.71, "winter_peak": 17.71, "autumn_spring": 16.76, "summer": 15.81},
               "biomass": 30.0},
    "rtn": {"discount_rate": 0.035, "build_rate_gw_per_yr": 8.0},
    "retail": {"ratio": 2.2, "cap": 528.0},
    "power": {"adequacy_margin": 0.1, "reserve": True, "reserve_demand_fraction": 0.03,
              "reserve_renewable_fraction": 0.1, "largest_unit_mw": 0.0, "value_of_lost_load": None,
              "interconnector_cost": 1.0, "distribution_cost": 0.0},
    "coupling": {"max_iterations": 2, "threshold": 0.01, "gap": 0.001},
}


def merged_manifest(manifest: dict) -> dict:
    out = copy.deepcopy(DEFAULT_MANIFEST)
    for key, value in manifest.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def _flag(x) -> bool:
    return bool(x) and not (isinstance(x, float) and math.isnan(x))


@dataclass(eq=False)
class Scenario:
    """All inputs of a coupled study.

    ``manifest`` holds scalar settings, ``tables`` the typed CSV tables. Domain
    objects (catalogs, cells, calendars, model instances) are derived on demand.
    """

    manifest: dict
    tables: dict[str, pd.DataFrame]
    root: str = ""
    calendar_override: TimeSliceCalendar | None = field(default=None, repr=False)
    override_hours: np.ndarray | None = field(default=None, repr=False)  # rows of the profiles kept

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        if merged_manifest(self.manifest) != merged_manifest(other.manifest) or set(self.tables) != set(other.tables):
            return False
        for k, t in self.tables.items():
            o = other.tables[k]
            if list(t.columns) != list(o.columns) or len(t) != len(o):
                return False
            if not t.reset_index(drop=True).astype(object).equals(o.reset_index(drop=True).astype(object)):
                return False
        return True

    # settings

    @cached_property
    def settings(self) -> dict:
        return merged_manifest(self.manifest)

    @property
    def name(self) -> str:
        return self.settings["name"]

    @property
    def periods(self) -> tuple[int, ...]:
        return tuple(int(p) for p in self.settings["periods"])

    @property
    def boiler_efficiency(self) -> float:
        return float(self.settings["heat"]["boiler_efficiency"])

    @property
    def retail(self) -> RetailTransform:
        r = self.settings["retail"]
        return RetailTransform(float(r["ratio"]), float(r["cap"]))

    @property
    def season_days(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.settings["calendar"]["season_days"].items()}

    @cached_property
    def calendar(self) -> TimeSliceCalendar:
        if self.calendar_override is not None:
            return self.calendar_override
        t = self.tables["calendar"].sort_values("day")
        return TimeSliceCalendar(tuple(t.season), tuple(float(w) for w in t.weight), self.season_days)

    @cached_property
    def profiles(self) -> pd.DataFrame:
        t = self.tables["profiles"].sort_values("hour").reset_index(drop=True)
        if self.override_hours is not None:
            t = t.iloc[self.override_hours].reset_index(drop=True)
        return t

    # power side

    @cached_property
    def regions(self) -> tuple[str, ...]:
        return tuple(self.tables["power_regions"].region)

    @cached_property
    def power_catalog(self) -> PowerCatalog:
        gens = []
        for r in self.tables["generation"].itertuples(index=False):
            gens.append(GenerationTechnology(
                r.name, r.capital_cost__gbp_per_kw, r.fixed_om__gbp_per_kw_yr, r.discount_rate__pct / 100.0,
                r.lifetime__yr, r.carbon_intensity__kg_per_mwh, r.variable_cost__gbp_per_mwh, r.derating,
                _flag(r.hydrogen_fuelled), _flag(r.renewable), r.heat_rate__mwh_per_mwh,
                profile=r.profile if isinstance(r.profile, str) else ""))
        stores = []
        for r in self.tables["power_storage"].itertuples(index=False):
            stores.append(StorageTechnology(r.name, r.capital_cost__gbp_per_kw, r.duration__h, r.efficiency,
                                            r.lifetime__yr, r.discount_rate__pct / 100.0, r.fixed_om__gbp_per_kw_yr))
        return PowerCatalog(tuple(gens), tuple(stores))

    @cached_property
    def power_policy(self) -> PowerPolicy:
        p = self.settings["power"]
        voll = p.get("value_of_lost_load")
        return PowerPolicy(
            adequacy_margin=p.get("adequacy_margin"), reserve=bool(p.get("reserve", True)),
            reserve_demand_fraction=float(p.get("reserve_demand_fraction", 0.03)),
            reserve_renewable_fraction=float(p.get("reserve_renewable_fraction", 0.1)),
            largest_unit=float(p.get("largest_unit_mw", 0.0)),
            value_of_lost_load=None if voll is None else float(voll),
            interconnector_cost=float(p.get("interconnector_cost", 1.0)),
            distribution_cost=float(p.get("distribution_cost", 0.0)))

    def _period_row(self, period: int):
        t = self.tables["power_periods"]
        hit = t[t.period == period]
        if hit.empty:
            raise KeyError(f"no power_periods row for {period}")
        return hit.iloc[0]

    def _shaped(self, column: str, total_mwh: float) -> np.ndarray:
        """A profile column scaled so its weighted annual sum is ``total_mwh``."""
        shape = self.profiles[column].to_numpy(float)
        w = self.calendar.hour_weight
        denom = float(w @ shape)
        return np.zeros_like(shape) if denom <= 0 else shape * total_mwh / denom

    def baseline_demand(self, period: int) -> dict[str, np.ndarray]:
        twh = float(self._period_row(period).baseline_demand__twh)
        return {r.region: self._shaped("baseline", twh * 1e6 * r.baseline_share)
                for r in self.tables["power_regions"].itertuples(index=False)}

    def capacity_factors(self) -> dict[tuple[str, str], np.ndarray]:
        out = {}
        for g in self.power_catalog.generation:
            if not g.renewable:
                continue
            for r in self.regions:
                col = f"{g.profile}_{r}"
                if col in self.profiles.columns:
                    out[g.name, r] = np.clip(self.profiles[col].to_numpy(float), 0.0, 1.0)
        return out

    def power_instance(self, period: int, heat_electric=None, h2_electric=None, hydrogen_supply=None,
                       hydrogen_price=None) -> PowerSystemInstance:
        row = self._period_row(period)
        existing, maximum = {}, {}
        for r in self.tables["power_capacity"].itertuples(index=False):
            existing[r.technology, r.region] = float(r.existing__mw)
            if r.max__mw is not None and not (isinstance(r.max__mw, float) and math.isnan(r.max__mw)):
                maximum[r.technology, r.region] = float(r.max__mw)
        links = tuple(TransferLink(r.name, r.region_a, r.region_b, r.capacity__mw, r.reinforcement_cost__gbp_per_mw_yr)
                      for r in self.tables["power_links"].itertuples(index=False))
        regions = self.tables["power_regions"]
        cap = row.carbon_cap__g_per_kwh
        return PowerSystemInstance(
            period=period, calendar=self.calendar, regions=self.regions,
            baseline_demand=self.baseline_demand(period),
            heat_electric_demand=dict(heat_electric or {}), h2_electric_demand=dict(h2_electric or {}),
            capacity_factors=self.capacity_factors(),
            carbon_cap=None if cap is None or (isinstance(cap, float) and math.isnan(cap)) else float(cap),
            existing_capacity=existing, max_capacity=maximum, links=links,
            interconnector_capacity=dict(zip(regions.region, regions.interconnector__mw)),
            distribution_capacity=dict(zip(regions.region, regions.distribution__mw)),
            policy=self.power_policy, hydrogen_supply=hydrogen_supply, hydrogen_price=hydrogen_price)

    # heat and hydrogen side

    def heat_slice_weights(self, sector: str) -> np.ndarray:
        w = np.ones(N_SLICES)
        t = self.tables["heat_slice_profile"]
        for r in t[t.sector == sector].itertuples(index=False):
            w[slice_index(r.season, r.daily_period)] = r.weight
        return w

    def heat_twh(self, period: int) -> float:
        anchors = {int(k): float(v) for k, v in self.settings["heat"]["trajectory_twh"].items()}
        return heat_demand_trajectory(period, anchors)

    def slice_heat_gwh(self, period: int, sector: str, share: float) -> np.ndarray:
        n_s = self.calendar.nominal_slice_hours()
        w = n_s * self.heat_slice_weights(sector)
        split = float(self.settings["heat"]["sector_split"][sector])
        return self.heat_twh(period) * 1000.0 * split * share * w / w.sum()

    @cached_property
    def cells(self) -> tuple[Cell, ...]:
        edges = self.tables["edges"]
        out = []
        for r in self.tables["cells"].itertuples(index=False):
            demand = {}
            if not _flag(r.offshore):
                for sec in self.settings["heat"]["sector_split"]:
                    for p in self.periods:
                        demand[sec, p] = tuple(self.slice_heat_gwh(p, sec, r.heat_share))
            nbrs = tuple((e.b if e.a == r.id else e.a, e.distance__km) for e in edges.itertuples(index=False)
                         if r.id in (e.a, e.b))
            out.append(Cell(r.id, r.x__km, r.y__km, r.region, demand, _flag(r.cavern), _flag(r.offshore), nbrs))
        return tuple(out)

    @cached_property
    def region_mapping(self) -> RegionMapping:
        return RegionMapping.from_cells(self.cells)

    @cached_property
    def conversion(self) -> tuple[ConversionTechnology, ...]:
        coef = {r.name: r for r in self.tables["conversion_coefficients"].itertuples(index=False)}
        out = []
        for r in self.tables["h2_production"].itertuples(index=False):
            c = coef.get(r.name)
            if c is None:
                raise KeyError(f"no conversion coefficients for {r.name}")
            capex = {p: float(getattr(r, f"capex_{p}__gbp_per_kw")) for p in (2020, 2030, 2040, 2050)}
            out.append(ConversionTechnology(r.name, r.unit_capacity__gw, capex, c.gas__mwh, c.electricity__mwh,
                                            c.biomass__mwh, c.co2_captured__t, c.residual_emission__t,
                                            c.lifetime__yr, c.variable_om__gbp_per_mwh))
        return tuple(out)

    @cached_property
    def heat_technologies(self) -> tuple[HeatTechnology, ...]:
        cops: dict[str, dict[str, float]] = {}
        for r in self.tables["heat_seasonal_cop"].itertuples(index=False):
            cops.setdefault(r.technology, {})[r.season] = float(r.cop)
        out = []
        for r in self.tables["heat_technologies"].itertuples(index=False):
            eff = 0.0 if r.efficiency__pct is None or pd.isna(r.efficiency__pct) else r.efficiency__pct / 100.0
            cop = 0.0 if r.cop is None or pd.isna(r.cop) else float(r.cop)
            out.append(HeatTechnology(r.name, r.capex__gbp_per_kwth, eff, cop, cops.get(r.name, {}),
                                      _flag(r.new_build), r.lifetime__yr))
        return tuple(out)

    @cached_property
    def storage_assets(self) -> tuple[StorageAsset, ...]:
        out = []
        for r in self.tables["h2_storage"].itertuples(index=False):
            def num(x):
                return 0.0 if x is None or pd.isna(x) else float(x)
            inj = co2_well_rate(num(r.injectivity__mt_per_yr)) if r.kind == "co2_well" else num(r.injectivity__mw)
            out.append(StorageAsset(r.name, r.kind, r.capex__gbp_m, num(r.capacity__gwh), inj,
                                    num(r.deliverability__mw), True, int(r.max_units)))
        return tuple(out)

    @cached_property
    def pipelines(self) -> tuple[PipelineOption, ...]:
        return tuple(PipelineOption(r.name, r.carrier, r.diameter__inch, r.capex__gbpk_per_km, r.max_flow__kg_per_s,
                                    r.loss__pct_per_km) for r in self.tables["pipelines"].itertuples(index=False))

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(Edge(r.a, r.b, r.distance__km, _flag(r.offshore)) for r in self.tables["edges"].itertuples(index=False))

    def baseline_heat_emissions(self) -> float:
        """2020 heat emissions (Mt): the manifest value, else all base-year heat from gas boilers."""
        h = self.settings["heat"]
        if h.get("baseline_emissions_mt") is not None:
            return float(h["baseline_emissions_mt"])
        factor = float(self.settings.get("gas_emission_factor", 0.184))
        return heat_demand_trajectory(int(self.settings["base_year"]),
                                      {int(k): float(v) for k, v in h["trajectory_twh"].items()}) \
            * factor / self.boiler_efficiency

    @cached_property
    def emissions(self) -> EmissionTrajectory:
        base = self.baseline_heat_emissions()
        caps = emission_caps(base, self.periods, int(self.settings["base_year"]),
                             int(self.settings["heat"].get("emission_zero_year", 2050)))
        return EmissionTrajectory(base, caps)

    def rtn_settings(self) -> RtnSettings:
        periods = self.tables["power_periods"]
        pr = self.settings["prices"]
        return RtnSettings(
            discount_rate=float(self.settings["rtn"]["discount_rate"]),
            build_rate=float(self.settings["rtn"]["build_rate_gw_per_yr"]),
            period_years=int(self.settings["period_years"]),
            gas_price={k: float(v) for k, v in pr["gas"].items()},
            biomass_price=float(pr["biomass"]),
            legacy_gas_survival=dict(zip(periods.period.astype(int), periods.legacy_gas_survival.astype(float))),
            electricity_emission_factor=dict(zip(periods.period.astype(int),
                                                 periods.grid_emission_factor__t_per_mwh.astype(float))),
        )

    def rtn_instance(self) -> RtnInstance:
        return RtnInstance(self.periods, self.calendar, self.cells, self.edges, self.conversion,
                           self.heat_technologies, self.storage_assets, self.pipelines, self.emissions,
                           self.rtn_settings())

    def hourly_heat_demand(self, period: int) -> dict[tuple[str, str], np.ndarray]:
        """MW of heat per (region, sector) and modelled hour, matching the RTN slice totals."""
        cal = self.calendar
        hs, w = cal.hour_slice, cal.hour_weight
        out = {}
        for sec in self.settings["heat"]["sector_split"]:
            shape = self.profiles[f"heat_{sec}"].to_numpy(float)
            denom = np.bincount(hs, weights=w * shape, minlength=N_SLICES)
            for r in self.regions:
                gwh = sum((c.demand(sec, period) for c in self.cells if c.region == r and not c.offshore),
                          np.zeros(N_SLICES))
                scale = np.divide(gwh * 1000.0, denom, out=np.zeros(N_SLICES), where=denom > 0)
                out[r, sec] = shape * scale[hs]
        return out

    def hourly_cop(self) -> dict[str, np.ndarray]:
        season = self.calendar.hour_season
        out = {}
        for tech in self.heat_technologies:
            if tech.name == "ashp":
                out["ashp"] = np.array([tech.cop_in(SEASONS[s]) for s in season])
            elif tech.name == "hybrid":
                out["hybrid_elec"] = np.array([tech.cop_in(SEASONS[s]) for s in season])
        if "ashp" not in out:
            raise ValueError("scenario has no heat pump technology")
        out.setdefault("hybrid_elec", out["ashp"])
        return out
