"""Data types for the hydrogen/heat resource-technology network."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd

from ..timeslice import N_SLICES, SEASONS, TimeSliceCalendar

SECTORS = ("domestic", "commercial")
HEAT_MODES = ("gas_boiler", "h2_boiler", "ashp", "hybrid_elec", "hybrid_h2")
ELECTRIC_MODES = ("ashp", "hybrid_elec")
HYDROGEN_MODES = ("h2_boiler", "hybrid_h2")
H2_MW_PER_KG_S = 120.0  # lower heating value, 120 MJ/kg
CO2_T_PER_H_PER_KG_S = 3.6
HOURS_PER_YEAR = 8760.0


@dataclass(frozen=True)
class Cell:
    id: str
    x: float
    y: float
    region: str
    heat_demand: Mapping[tuple[str, int], tuple[float, ...]] = field(default_factory=dict)  # GWh per slice
    cavern: bool = False
    offshore: bool = False
    neighbours: tuple[tuple[str, float], ...] = ()  # (cell id, km)

    def demand(self, sector: str, period: int) -> np.ndarray:
        return np.asarray(self.heat_demand.get((sector, period), (0.0,) * N_SLICES), float)

    def problems(self) -> list[str]:
        out = []
        for key, values in self.heat_demand.items():
            if len(values) != N_SLICES:
                out.append(f"cell {self.id}: heat demand {key} has {len(values)} slices, expected {N_SLICES}")
            if any(v < 0 for v in values):
                out.append(f"cell {self.id}: negative heat demand for {key}")
        return out


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    km: float
    offshore: bool = False


@dataclass(frozen=True)
class ConversionTechnology:
    """A hydrogen production route. Coefficients are per MWh of H2 output."""

    name: str
    unit_capacity: float  # GW per unit
    capex: Mapping[int, float]  # £/kW by period start year
    gas: float = 0.0  # MWh consumed
    electricity: float = 0.0
    biomass: float = 0.0
    co2_captured: float = 0.0  # t produced into the CO2 network
    residual_emission: float = 0.0  # t released (negative: net removal)
    lifetime: float = 25.0
    variable_om: float = 0.0  # £/MWh H2

    @property
    def coefficients(self) -> dict[str, float]:
        return {"h2": 1.0, "gas": -self.gas, "electricity": -self.electricity, "biomass": -self.biomass,
                "co2": self.co2_captured}

    def capex_for(self, period: int) -> float:
        return float(self.capex[period])

    def problems(self) -> list[str]:
        out = []
        if self.unit_capacity <= 0:
            out.append(f"{self.name}: unit capacity must be > 0")
        if any(v < 0 for v in self.capex.values()):
            out.append(f"{self.name}: negative capital cost")
        if min(self.gas, self.electricity, self.biomass, self.co2_captured) < 0:
            out.append(f"{self.name}: input coefficients and capture must be >= 0")
        if self.lifetime <= 0:
            out.append(f"{self.name}: lifetime must be > 0")
        outputs = [k for k, v in self.coefficients.items() if v > 0 and k != "co2"]
        if outputs != ["h2"]:
            out.append(f"{self.name}: exactly one primary output expected, got {outputs}")
        return out


@dataclass(frozen=True)
class HeatTechnology:
    name: str  # gas_boiler, h2_boiler, ashp or hybrid
    capex: float  # £/kWth
    efficiency: float = 0.0  # boiler (sub-unit) efficiency
    cop: float = 0.0  # rated heat pump COP
    seasonal_cop: Mapping[str, float] = field(default_factory=dict)
    new_build: bool = True
    lifetime: float = 15.0

    @property
    def modes(self) -> tuple[str, ...]:
        return {"gas_boiler": ("gas_boiler",), "h2_boiler": ("h2_boiler",), "ashp": ("ashp",),
                "hybrid": ("hybrid_elec", "hybrid_h2")}[self.name]

    @property
    def mode_share(self) -> float:
        """Fraction of rated heat output each sub-unit may deliver."""
        return 0.5 if self.name == "hybrid" else 1.0

    def cop_in(self, season: str) -> float:
        return float(self.seasonal_cop.get(season, self.cop))

    def problems(self) -> list[str]:
        out = []
        if self.name not in ("gas_boiler", "h2_boiler", "ashp", "hybrid"):
            out.append(f"unknown heat technology {self.name}")
            return out
        if self.capex < 0:
            out.append(f"{self.name}: negative capital cost")
        if self.name != "ashp" and not 0 < self.efficiency <= 1:
            out.append(f"{self.name}: boiler efficiency must lie in (0, 1]")
        if self.name in ("ashp", "hybrid"):
            cops = [self.cop, *self.seasonal_cop.values()]
            if any(c <= 1 for c in cops):
                out.append(f"{self.name}: COP must exceed 1")
            missing = [s for s in SEASONS if s not in self.seasonal_cop]
            if missing:
                out.append(f"{self.name}: seasonal COP missing for {missing}")
        return out


@dataclass(frozen=True)
class StorageAsset:
    name: str
    kind: str  # cavern, vessel, co2_well
    capex: float  # £m per unit
    capacity: float = 0.0  # GWh per unit (0 for wells)
    injectivity: float = 0.0  # MW per unit (t/h of CO2 for wells)
    deliverability: float = 0.0  # MW per unit
    integer: bool = True
    max_units: int = 50

    def problems(self) -> list[str]:
        out = []
        if self.kind not in ("cavern", "vessel", "co2_well"):
            out.append(f"{self.name}: unknown storage kind {self.kind}")
        if self.capex < 0:
            out.append(f"{self.name}: negative capital cost")
        if self.kind != "co2_well" and self.capacity <= 0:
            out.append(f"{self.name}: capacity must be > 0")
        if self.injectivity <= 0:
            out.append(f"{self.name}: injectivity must be > 0")
        return out


def co2_well_rate(mt_per_year: float) -> float:
    """t/h injection rate of a well rated in Mt/yr."""
    return mt_per_year * 1e6 / HOURS_PER_YEAR


@dataclass(frozen=True)
class PipelineOption:
    name: str
    carrier: str  # h2, co2_onshore, co2_offshore
    diameter: float  # inch
    capex: float  # £k/km
    max_flow: float  # kg/s
    loss: float  # % per km
    max_units: int = 20

    @property
    def flow_capacity(self) -> float:
        """MW of H2, or t/h of CO2."""
        return self.max_flow * (H2_MW_PER_KG_S if self.carrier == "h2" else CO2_T_PER_H_PER_KG_S)

    @property
    def resource(self) -> str:
        return "h2" if self.carrier == "h2" else "co2"

    def problems(self) -> list[str]:
        out = []
        if self.carrier not in ("h2", "co2_onshore", "co2_offshore"):
            out.append(f"{self.name}: unknown carrier {self.carrier}")
        if self.capex <= 0 or self.max_flow <= 0:
            out.append(f"{self.name}: cost and flow must be > 0")
        if not 0 <= self.loss < 100:
            out.append(f"{self.name}: loss must lie in [0, 100) %/km")
        return out


@dataclass(frozen=True)
class EmissionTrajectory:
    baseline: float  # Mt CO2/yr in the base year
    caps: Mapping[int, float]  # Mt CO2/yr per period

    def problems(self) -> list[str]:
        periods = sorted(self.caps)
        values = [self.caps[p] for p in periods]
        out = []
        if any(b > a + 1e-12 for a, b in zip(values, values[1:])):
            out.append("emission caps must be non-increasing")
        if values and values[-1] != 0:
            out.append("final-period emission cap must be 0")
        return out


@dataclass(frozen=True)
class RtnSettings:
    discount_rate: float = 0.035
    build_rate: float = 8.0  # GW of new H2 production per year
    period_years: int = 10
    gas_price: Mapping[str, float] = field(default_factory=lambda: {
        "winter": 17.71, "winter_peak": 17.71, "autumn_spring": 16.76, "summer": 15.81})
    biomass_price: float = 30.0  # £/MWh
    gas_emission_factor: float = 0.184  # t/MWh
    legacy_gas_survival: Mapping[int, float] = field(default_factory=dict)
    electricity_emission_factor: Mapping[int, float] = field(default_factory=dict)  # t/MWh
    base_year: int | None = None  # discounting anchor; defaults to the first period


@dataclass(frozen=True, eq=False)
class RtnInstance:
    periods: tuple[int, ...]
    calendar: TimeSliceCalendar
    cells: tuple[Cell, ...]
    edges: tuple[Edge, ...]
    conversion: tuple[ConversionTechnology, ...]
    heat: tuple[HeatTechnology, ...]
    storage: tuple[StorageAsset, ...]
    pipelines: tuple[PipelineOption, ...]
    emissions: EmissionTrajectory
    settings: RtnSettings = RtnSettings()

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(cell_id)

    @property
    def slice_hours(self) -> np.ndarray:
        return self.calendar.nominal_slice_hours()

    def heat_tech(self, name: str) -> HeatTechnology | None:
        for t in self.heat:
            if t.name == name:
                return t
        return None

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(c.region for c in self.cells if not c.offshore))


@dataclass(frozen=True, eq=False)
class HeatSupplyMix:
    """Heat shares keyed by (period, location, sector, slice, mode).

    ``table`` columns: period, location, sector, slice, mode, share, demand_gwh.
    ``demand_gwh`` is the slice demand of the (period, location, sector) key,
    repeated on each mode row, so mixes can be demand-weighted.
    """

    table: pd.DataFrame

    COLUMNS = ("period", "location", "sector", "slice", "mode", "share", "demand_gwh")

    def share(self, period: int, location: str, sector: str, slice_: int, mode: str) -> float:
        t = self.table
        hit = t[(t.period == period) & (t.location == location) & (t.sector == sector) & (t.slice == slice_)
                & (t["mode"] == mode)]
        return float(hit.share.iloc[0]) if len(hit) else 0.0

    def shares(self, period: int, location: str, sector: str, mode: str) -> np.ndarray:
        """16 slice shares for one mode."""
        t = self.table
        hit = t[(t.period == period) & (t.location == location) & (t.sector == sector) & (t["mode"] == mode)]
        out = np.zeros(N_SLICES)
        out[hit.slice.to_numpy(int)] = hit.share.to_numpy(float)
        return out

    def closure_error(self) -> float:
        """Largest |sum of shares - 1| over keys."""
        if self.table.empty:
            return 0.0
        sums = self.table.groupby(["period", "location", "sector", "slice"]).share.sum()
        return float((sums - 1.0).abs().max())

    def keys(self) -> set[tuple]:
        return set(map(tuple, self.table[["period", "location", "sector", "slice", "mode"]].itertuples(index=False)))

    @classmethod
    def uniform(cls, periods, locations, mode: str = "ashp", demand: float = 1.0) -> "HeatSupplyMix":
        rows = [(p, loc, sec, s, m, 1.0 if m == mode else 0.0, demand)
                for p in periods for loc in locations for sec in SECTORS for s in range(N_SLICES) for m in HEAT_MODES]
        return cls(pd.DataFrame(rows, columns=list(cls.COLUMNS)))


def _empty(columns) -> pd.DataFrame:
    return pd.DataFrame({c: pd.Series(dtype=object) for c in columns})


PRODUCTION_COLUMNS = ("period", "technology", "cell", "units_built", "units_total", "capacity_gw")
STORAGE_COLUMNS = ("period", "asset", "cell", "units_built", "units_total", "capacity_gwh")
PIPELINE_COLUMNS = ("period", "carrier", "option", "diameter_in", "cell_a", "cell_b", "built", "total",
                    "capacity")
DISPATCH_COLUMNS = ("period", "technology", "cell", "slice", "output_mw", "electricity_mw")
FLOW_COLUMNS = ("period", "resource", "from_cell", "to_cell", "slice", "flow")


@dataclass(frozen=True, eq=False)
class HydrogenPlan:
    production: pd.DataFrame = field(default_factory=lambda: _empty(PRODUCTION_COLUMNS))
    storage: pd.DataFrame = field(default_factory=lambda: _empty(STORAGE_COLUMNS))
    pipelines: pd.DataFrame = field(default_factory=lambda: _empty(PIPELINE_COLUMNS))
    dispatch: pd.DataFrame = field(default_factory=lambda: _empty(DISPATCH_COLUMNS))
    flows: pd.DataFrame = field(default_factory=lambda: _empty(FLOW_COLUMNS))
    headroom: Mapping[int, np.ndarray] = field(default_factory=dict)  # period -> MW H2 unused per slice
    marginal_cost: Mapping[int, np.ndarray] = field(default_factory=dict)  # period -> £/MWh H2 per slice

    @property
    def is_empty(self) -> bool:
        return self.production.empty and self.storage.empty and self.pipelines.empty

    def capacity_gw(self, period: int) -> dict[str, float]:
        t = self.production[self.production.period == period]
        return t.groupby("technology").capacity_gw.sum().to_dict()
