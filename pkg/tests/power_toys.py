"""Small hand-built power instances."""

from __future__ import annotations

import numpy as np

from softlink.power import GenerationTechnology, PowerCatalog, PowerPolicy, PowerSystemInstance, StorageTechnology
from softlink.timeslice import TimeSliceCalendar

CCGT = GenerationTechnology("ccgt", 600, 13.1, 0.075, 25, carbon_intensity=318.8, variable_cost=32)
OCGT = GenerationTechnology("ocgt", 400, 6.8, 0.071, 25, carbon_intensity=520.6, variable_cost=47)
WIND = GenerationTechnology("wind", 1100, 24.5, 0.063, 25, derating=0.1, renewable=True, profile="wind",
                            reserve_capable=False)
BATTERY = StorageTechnology("battery", 395, duration=4, efficiency=0.85, lifetime=20, discount_rate=0.07)
BARE = PowerPolicy(adequacy_margin=None, reserve=False)


def one_day(weight: float = 1.0) -> TimeSliceCalendar:
    return TimeSliceCalendar.representative([("winter", weight)])


def free_tech(name, cost, **kw):
    return GenerationTechnology(name, 0.0, 0.0, 0.05, 25, variable_cost=cost, **kw)


def instance(demand, calendar=None, **kw) -> PowerSystemInstance:
    demand = np.asarray(demand, float)
    calendar = calendar or one_day()
    if demand.size == 1:
        demand = np.full(calendar.n_hours, float(demand))
    kw.setdefault("policy", BARE)
    return PowerSystemInstance(period=2030, calendar=calendar, regions=("r",), baseline_demand={"r": demand}, **kw)


def wind_profile(n_hours: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.clip(0.45 + 0.35 * np.sin(np.arange(n_hours) / 3.0) + 0.1 * rng.standard_normal(n_hours), 0, 1)


def two_generator(demand) -> tuple[PowerSystemInstance, PowerCatalog]:
    cat = PowerCatalog((free_tech("cheap", 20), free_tech("dear", 50)))
    inst = instance(demand, existing_capacity={("cheap", "r"): 10}, max_capacity={("cheap", "r"): 10})
    return inst, cat
