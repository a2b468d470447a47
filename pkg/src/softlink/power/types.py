"""Data types for the electricity investment model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..timeslice import TimeSliceCalendar


def annuity_factor(rate: float, lifetime: float) -> float:
    """Capital recovery factor r / (1 - (1 + r)^-L); 1/L when r = 0."""
    if rate == 0:
        return 1.0 / lifetime
    return rate / (1.0 - (1.0 + rate) ** -lifetime)


@dataclass(frozen=True)
class GenerationTechnology:
    name: str
    capital_cost: float  # £/kW
    fixed_om: float  # £/kW/yr
    discount_rate: float
    lifetime: float  # yr
    carbon_intensity: float = 0.0  # kg/MWh
    variable_cost: float = 0.0  # £/MWh, excludes hydrogen fuel
    derating: float = 0.95
    hydrogen_fuelled: bool = False
    renewable: bool = False
    heat_rate: float = 0.0  # MWh H2 per MWh electric
    reserve_capable: bool = True
    profile: str = ""  # capacity-factor profile key for renewables

    def annualised_cost(self) -> float:
        """£/MW/yr: annuitised capital plus fixed O&M."""
        return 1000.0 * (self.capital_cost * annuity_factor(self.discount_rate, self.lifetime) + self.fixed_om)

    def problems(self) -> list[str]:
        out = []
        for attr in ("capital_cost", "fixed_om", "variable_cost", "carbon_intensity", "discount_rate", "heat_rate"):
            if getattr(self, attr) < 0:
                out.append(f"{self.name}: {attr} must be >= 0")
        if not 0 <= self.derating <= 1:
            out.append(f"{self.name}: derating must lie in [0, 1]")
        if self.lifetime <= 0:
            out.append(f"{self.name}: lifetime must be > 0")
        if self.hydrogen_fuelled and self.heat_rate <= 0:
            out.append(f"{self.name}: hydrogen-fuelled technology needs a positive heat rate")
        if self.renewable and not self.profile:
            out.append(f"{self.name}: renewable technology needs a profile key")
        return out


@dataclass(frozen=True)
class StorageTechnology:
    name: str
    capital_cost: float  # £/kW
    duration: float = 4.0  # h
    efficiency: float = 0.85  # round trip
    lifetime: float = 20.0
    discount_rate: float = 0.07
    fixed_om: float = 0.0

    @property
    def derating(self) -> float:
        return min(1.0, self.duration / 4.0) * 0.95

    def annualised_cost(self) -> float:
        return 1000.0 * (self.capital_cost * annuity_factor(self.discount_rate, self.lifetime) + self.fixed_om)

    def problems(self) -> list[str]:
        out = []
        if self.capital_cost < 0 or self.fixed_om < 0:
            out.append(f"{self.name}: costs must be >= 0")
        if not 0 < self.efficiency <= 1:
            out.append(f"{self.name}: efficiency must lie in (0, 1]")
        if self.duration <= 0:
            out.append(f"{self.name}: duration must be > 0")
        if self.lifetime <= 0:
            out.append(f"{self.name}: lifetime must be > 0")
        return out


@dataclass(frozen=True)
class PowerCatalog:
    generation: tuple[GenerationTechnology, ...]
    storage: tuple[StorageTechnology, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generation", tuple(self.generation))
        object.__setattr__(self, "storage", tuple(self.storage))

    def tech(self, name: str) -> GenerationTechnology:
        for g in self.generation:
            if g.name == name:
                return g
        raise KeyError(name)

    def store(self, name: str) -> StorageTechnology:
        for s in self.storage:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class TransferLink:
    name: str
    region_a: str
    region_b: str
    capacity: float  # MW, existing
    reinforcement_cost: float = 0.0  # £/MW/yr for added capacity


@dataclass(frozen=True)
class PowerPolicy:
    adequacy_margin: float | None = 0.1
    reserve: bool = True
    reserve_demand_fraction: float = 0.03
    reserve_renewable_fraction: float = 0.10
    largest_unit: float = 0.0  # MW
    value_of_lost_load: float | None = None  # £/MWh; None forbids shedding
    interconnector_energy_neutral: bool = True
    interconnector_cost: float = 1.0  # £/MWh wheeling, discourages churn
    distribution_cost: float = 0.0  # £/MW/yr of regional peak above existing
    battery_cyclic_per_day: bool | None = None  # None: per day on reduced calendars, yearly otherwise


@dataclass(frozen=True, eq=False)
class PowerSystemInstance:
    """One snapshot year of the power system, all series in MW over the modelled hours."""

    period: int
    calendar: TimeSliceCalendar
    regions: tuple[str, ...]
    baseline_demand: Mapping[str, np.ndarray]
    heat_electric_demand: Mapping[str, np.ndarray] = field(default_factory=dict)
    h2_electric_demand: Mapping[str, np.ndarray] = field(default_factory=dict)
    capacity_factors: Mapping[tuple[str, str], np.ndarray] = field(default_factory=dict)
    carbon_cap: float | None = None  # g/kWh of annual demand
    existing_capacity: Mapping[tuple[str, str], float] = field(default_factory=dict)
    max_capacity: Mapping[tuple[str, str], float] = field(default_factory=dict)
    links: tuple[TransferLink, ...] = ()
    interconnector_capacity: Mapping[str, float] = field(default_factory=dict)
    distribution_capacity: Mapping[str, float] = field(default_factory=dict)
    policy: PowerPolicy = PowerPolicy()
    hydrogen_supply: np.ndarray | None = None  # MW of H2 available each hour
    hydrogen_price: np.ndarray | None = None  # £/MWh of H2 each hour

    @property
    def n_hours(self) -> int:
        return self.calendar.n_hours

    def _series(self, table: Mapping[str, np.ndarray], region: str) -> np.ndarray:
        s = table.get(region)
        return np.zeros(self.n_hours) if s is None else np.asarray(s, float)

    def demand(self, region: str) -> np.ndarray:
        """Total electric demand of a region (baseline + heat + H2 production)."""
        return (self._series(self.baseline_demand, region) + self._series(self.heat_electric_demand, region)
                + self._series(self.h2_electric_demand, region))

    def total_demand(self) -> np.ndarray:
        return sum((self.demand(r) for r in self.regions), np.zeros(self.n_hours))

    def problems(self) -> list[str]:
        out = []
        H = self.n_hours
        for label, table in (("baseline_demand", self.baseline_demand),
                             ("heat_electric_demand", self.heat_electric_demand),
                             ("h2_electric_demand", self.h2_electric_demand)):
            for region, series in table.items():
                if region not in self.regions:
                    out.append(f"{label}: unknown region {region}")
                if len(series) != H:
                    out.append(f"{label}[{region}]: length {len(series)} != {H} modelled hours")
        for key, series in self.capacity_factors.items():
            if len(series) != H:
                out.append(f"capacity factor {key}: length {len(series)} != {H} modelled hours")
        for label, series in (("hydrogen_supply", self.hydrogen_supply), ("hydrogen_price", self.hydrogen_price)):
            if series is not None and len(series) != H:
                out.append(f"{label}: length {len(series)} != {H} modelled hours")
        if self.carbon_cap is not None and self.carbon_cap < 0:
            out.append("carbon cap must be >= 0")
        if H == 0:
            out.append("calendar has no days")
        for link in self.links:
            for r in (link.region_a, link.region_b):
                if r not in self.regions:
                    out.append(f"link {link.name}: unknown region {r}")
        return out


@dataclass(frozen=True, eq=False)
class PowerSolutionSummary:
    period: int
    capacity_gw: dict[str, float]
    capacity_by_region_gw: dict[tuple[str, str], float]
    energy_twh: dict[str, float]
    battery_gw: float
    battery_charge_twh: float
    battery_discharge_twh: float
    emissions_mt: float
    intensity_g_per_kwh: float
    prices: dict[str, np.ndarray]
    mean_price: float  # load-weighted over regions and hours
    total_cost: float
    demand_twh: dict[str, float]
    shed_twh: float
    hydrogen_used_twh: float
    time_mean_price: float = 0.0  # hour-weighted, simple mean across regions

    @property
    def heat_electric_twh(self) -> float:
        return self.demand_twh.get("heat", 0.0)
