"""The ``gb-desk`` reference fixture: appendix technology tables plus synthetic GB-shaped data.

Technology, pipeline and storage numbers are copied from the published input
tables. Everything the source does not publish (profiles, cells, existing
fleet, conversion coefficients) is a labelled fixture assumption generated
here deterministically.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from ..timeslice import DAILY_PERIODS, SEASONS, TimeSliceCalendar
from .model import Scenario
from .schema import SCHEMAS

REGIONS = ("north", "south")
SEED = 20220601

# name, capex £/kW, fixed O&M £/kW/yr, discount %, lifetime, kg/MWh (published);
# variable cost, derating, hydrogen-fuelled, renewable, heat rate, profile (fixture)
GENERATION = [
    ("nuclear", 4100, 72.9, 8.9, 40, 0, 10.0, 0.9, False, False, 0.0, ""),
    ("ccgt", 600, 13.1, 7.5, 25, 318.8, 35.0, 0.9, False, False, 0.0, ""),
    ("ocgt", 400, 6.8, 7.1, 25, 520.6, 55.0, 0.95, False, False, 0.0, ""),
    ("gas_ccs", 1300, 22.3, 7.3, 25, 31.9, 45.0, 0.9, False, False, 0.0, ""),
    ("h2_ocgt", 400, 6.8, 7.1, 25, 0, 3.0, 0.95, True, False, 2.86, ""),
    ("h2_ccgt", 600, 13.1, 7.5, 25, 0, 2.0, 0.9, True, False, 1.82, ""),
    ("wind", 1100, 24.5, 6.3, 25, 0, 0.0, 0.1, False, True, 0.0, "wind"),
    ("pv", 300, 6.0, 6.0, 25, 0, 0.0, 0.0, False, True, 0.0, "solar"),
]
POWER_STORAGE = [("battery", 395, 0.0, 7.0, 20, 4.0, 0.9)]  # fixed O&M "-" read as 0; duration/efficiency fixture

# name, unit GW, capex £/kW for 2020-2030 .. 2050-2060
H2_PRODUCTION = [
    ("smr_syngas", 1, 320, 280, 239, 199),
    ("smr_fluegas", 1, 480, 420, 360, 299),
    ("atr_ccs", 1, 510, 395, 331, 266),
    ("atr_ghr_ccs", 1, 490, 379, 318, 256),
    ("pem_low", 0.1, 496, 268, 205, 143),
    ("pem_high", 0.1, 587, 317, 302, 169),
    ("soe", 0.1, 971, 728, 486, 363),
    ("biomass_gasification_ccs", 0.2, 1100, 851, 713, 574),
]
# Per MWh of H2: gas, electricity, biomass MWh; CO2 captured and residual t; lifetime; variable O&M.
# Fixture assumptions (not published): reformers burn 0.184 t/MWh of gas carbon split between
# capture and residual by route; ATR draws more electricity than SMR; biomass CO2 is biogenic,
# so its captured share counts as a removal.
CONVERSION = [
    ("smr_syngas", 1.30, 0.02, 0.0, 0.167, 0.072, 25, 2.0),
    ("smr_fluegas", 1.32, 0.05, 0.0, 0.219, 0.024, 25, 2.5),
    ("atr_ccs", 1.25, 0.08, 0.0, 0.218, 0.012, 25, 2.5),
    ("atr_ghr_ccs", 1.20, 0.07, 0.0, 0.210, 0.011, 25, 2.5),
    ("pem_low", 0.0, 1.54, 0.0, 0.0, 0.0, 15, 3.0),
    ("pem_high", 0.0, 1.35, 0.0, 0.0, 0.0, 15, 3.0),
    ("soe", 0.0, 1.25, 0.0, 0.0, 0.0, 15, 3.0),
    ("biomass_gasification_ccs", 0.0, 0.05, 1.45, 0.500, -0.500, 25, 5.0),
]
# name, capex £/kWth, efficiency %, COP, new build, lifetime
HEAT_TECHNOLOGIES = [
    ("h2_boiler", 48, 90, None, True, 15),
    ("gas_boiler", 48, 90, None, False, 15),
    ("ashp", 412, None, 3.04, True, 15),
    ("hybrid", 209, 90, 3.03, True, 15),
]
SEASONAL_COP = {"winter": 2.6, "winter_peak": 2.0, "autumn_spring": 3.04, "summer": 3.4}
# name, carrier, inch, £k/km, kg/s, %/km
PIPELINES = [
    ("h2_18in", "h2", 18, 870, 7.1, 0.005),
    ("h2_24in", "h2", 24, 126, 30, 0.005),  # printed value, likely 1260; kept as published
    ("h2_36in", "h2", 36, 2020, 105, 0.005),
    ("h2_48in", "h2", 48, 2790, 220, 0.005),
    ("co2_onshore_12in", "co2_onshore", 12, 600, 88, 0.002),
    ("co2_onshore_26in", "co2_onshore", 26, 1300, 350, 0.002),
    ("co2_offshore_12in", "co2_offshore", 12, 780, 88, 0.002),
    ("co2_offshore_26in", "co2_offshore", 26, 1500, 350, 0.002),
]
# name, kind, £m/unit, GWh, injectivity MW, injectivity Mt/yr, deliverability MW, max units
H2_STORAGE = [
    ("medium_pressure_cavern", "cavern", 32, 64, 100, None, 200, 10),
    ("high_pressure_cavern", "cavern", 100, 144, 100, None, 200, 10),
    ("co2_injection_well", "co2_well", 66, None, None, 1.5, None, 20),
    ("pressure_vessel", "vessel", 7.5, 0.5, 50, None, 50, 20),  # fixture assumption
]

CELLS = [  # id, x km, y km, region, cavern, offshore, heat share
    ("N1", 300.0, 700.0, "north", True, False, 0.2),
    ("N2", 450.0, 650.0, "north", False, False, 0.15),
    ("S1", 350.0, 250.0, "south", True, False, 0.35),
    ("S2", 500.0, 200.0, "south", False, False, 0.3),
    ("X1", 650.0, 700.0, "north", False, True, 0.0),
]
EDGES = [("N1", "N2", 160.0, False), ("N1", "S1", 450.0, False), ("N2", "S2", 450.0, False),
         ("S1", "S2", 160.0, False), ("N1", "X1", 350.0, True), ("N2", "X1", 210.0, True)]

POWER_REGIONS = [("north", 0.4, 3000.0, 1e6), ("south", 0.6, 7000.0, 1e6)]
POWER_CAPACITY = [  # technology, region, existing MW, max MW
    ("nuclear", "north", 2000.0, 2000.0), ("nuclear", "south", 2500.0, 2500.0),
    ("ccgt", "north", 10000.0, None), ("ccgt", "south", 15000.0, None),
    ("ocgt", "north", 1000.0, None), ("ocgt", "south", 2000.0, None),
    ("gas_ccs", "north", 0.0, None), ("gas_ccs", "south", 0.0, None),
    ("h2_ocgt", "north", 0.0, None), ("h2_ocgt", "south", 0.0, None),
    ("h2_ccgt", "north", 0.0, None), ("h2_ccgt", "south", 0.0, None),
    ("wind", "north", 12000.0, 150000.0), ("wind", "south", 8000.0, 90000.0),
    ("pv", "north", 3000.0, 40000.0), ("pv", "south", 10000.0, 80000.0),
    ("battery", "north", 0.0, None), ("battery", "south", 0.0, None),
]
POWER_LINKS = [("north_south", "north", "south", 8000.0, 40000.0)]
POWER_PERIODS = [  # period, baseline TWh, g/kWh cap, grid t/MWh for the RTN, legacy gas survival
    (2030, 415.0, 41.0, 0.041, 1.0),
    (2040, 415.0, 0.0, 0.0, 0.0),
    (2050, 415.0, 0.0, 0.0, 0.0),
]

MANIFEST = {
    "name": "gb-desk",
    "description": "Desk-scale GB-shaped study: 4 onshore cells in 2 power regions, 1 offshore CO2 store, "
                   "representative days per season.",
    "base_year": 2020,
    "periods": [2030, 2040, 2050],
    "period_years": 10,
    "heat": {"trajectory_twh": {2020: 541.0, 2050: 476.0}, "sector_split": {"domestic": 0.7, "commercial": 0.3},
             "boiler_efficiency": 0.9, "emission_zero_year": 2050},
    "prices": {"gas": {"winter": 17.71, "winter_peak": 17.71, "autumn_spring": 16.76, "summer": 15.81},
               "biomass": 30.0},
    "rtn": {"discount_rate": 0.035, "build_rate_gw_per_yr": 8.0},
    "retail": {"ratio": 2.2, "cap": 528.0},
    "power": {"adequacy_margin": 0.1, "reserve": True, "value_of_lost_load": 6000.0, "interconnector_cost": 1.0},
    "coupling": {"max_iterations": 2, "threshold": 0.01, "gap": 0.001},
}

HEADERS = {
    "profiles": "# Synthetic GB-shaped hourly shapes (seeded generator, not measured data): baseline and heat\n"
                "# demand shapes are relative; wind_* and solar_* are capacity factors in [0, 1].\n",
    "pipelines": "# h2_24in capital cost is the printed 126 GBPk/km (probably 1260); kept as published.\n",
    "conversion_coefficients": "# Fixture assumptions per MWh of hydrogen; not published with the cost table.\n",
    "h2_storage": "# pressure_vessel is a fixture assumption; the other rows are published values.\n",
}


def _frame(table: str, rows) -> pd.DataFrame:
    return pd.DataFrame([list(r) for r in rows], columns=[c for c, _ in SCHEMAS[table]])


def _bump(hours: np.ndarray, centre: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((hours - centre) / width) ** 2)


def synthetic_year(seed: int = SEED) -> pd.DataFrame:
    """8760 hourly shapes on the default full-year calendar."""
    rng = np.random.default_rng(seed)
    cal = TimeSliceCalendar.full_year()
    days = np.arange(365)
    cold = np.cos(2 * np.pi * (days - 15) / 365.0)  # +1 mid-January, -1 mid-July
    peak = [d for d, s in enumerate(cal.day_season) if s == "winter_peak"][0]
    hod = np.arange(24, dtype=float)

    dom_level = np.clip(0.55 + 0.45 * cold + 0.06 * rng.standard_normal(365), 0.12, None)
    com_level = np.clip(0.5 + 0.3 * cold + 0.04 * rng.standard_normal(365), 0.15, None)
    base_level = 1.0 + 0.15 * cold + 0.03 * rng.standard_normal(365)
    dom_level[peak] = dom_level.max() * 1.2
    com_level[peak] = com_level.max() * 1.1
    base_level[peak] = base_level.max() * 1.05

    dom_shape = 0.45 + 0.9 * _bump(hod, 7.5, 1.3) + 1.1 * _bump(hod, 18.5, 1.8)
    com_shape = 0.35 + 0.85 * ((hod >= 8) & (hod < 18))
    base_shape = np.array([0.72, 0.68, 0.66, 0.65, 0.66, 0.7, 0.8, 0.95, 1.02, 1.04, 1.05, 1.05,
                           1.04, 1.02, 1.0, 1.0, 1.05, 1.18, 1.22, 1.16, 1.06, 0.98, 0.88, 0.78])

    wind_daily = {}
    base = np.clip(0.36 + 0.12 * cold + 0.16 * rng.standard_normal(365), 0.04, 0.85)
    for r, factor in (("north", 1.08), ("south", 0.9)):
        w = np.clip(factor * base + 0.06 * rng.standard_normal(365), 0.03, 0.9)
        w[peak] = 0.06  # still, cold peak day
        wind_daily[r] = w
    sun = np.clip(0.45 - 0.3 * cold, 0.08, None)  # daily peak output before cloud
    cloud = np.clip(0.75 + 0.2 * rng.standard_normal(365), 0.2, 1.0)
    half_day = 4.5 - 3.0 * cold  # hours either side of solar noon

    rows = {"hour": np.arange(8760), "baseline": [], "heat_domestic": [], "heat_commercial": []}
    wind = {r: [] for r in REGIONS}
    solar = {r: [] for r in REGIONS}
    for d in days:
        rows["baseline"].append(base_level[d] * base_shape)
        rows["heat_domestic"].append(dom_level[d] * dom_shape)
        rows["heat_commercial"].append(com_level[d] * com_shape)
        daylight = np.clip(np.cos(np.pi * (hod - 12.5) / (2 * half_day[d])), 0.0, None)
        for r, lat in (("north", 0.85), ("south", 1.0)):
            nxt = wind_daily[r][(d + 1) % 365]
            ramp = wind_daily[r][d] + (nxt - wind_daily[r][d]) * hod / 24.0
            wind[r].append(np.clip(ramp + 0.03 * rng.standard_normal(24), 0.0, 1.0))
            solar[r].append(np.clip(lat * sun[d] * cloud[d] * daylight, 0.0, 1.0))
    out = pd.DataFrame({k: (np.concatenate(v) if k != "hour" else v) for k, v in rows.items()})
    for r in REGIONS:
        out[f"wind_{r}"] = np.concatenate(wind[r])
        out[f"solar_{r}"] = np.concatenate(solar[r])
    return out.round(4)


def heat_slice_profile(profiles: pd.DataFrame, calendar: TimeSliceCalendar) -> pd.DataFrame:
    """Mean hourly heat intensity per (sector, season, daily period) of a synthetic year."""
    rows = []
    hs = calendar.hour_slice
    for sec in ("domestic", "commercial"):
        series = profiles[f"heat_{sec}"].to_numpy(float)
        means = np.bincount(hs, weights=series, minlength=16) / np.maximum(np.bincount(hs, minlength=16), 1)
        means = means / means.max()
        for k, value in enumerate(means):
            season = SEASONS[k // len(DAILY_PERIODS)]
            period = DAILY_PERIODS[k % len(DAILY_PERIODS)][0]
            rows.append((sec, season, period, round(float(value), 4)))
    return _frame("heat_slice_profile", rows)


def gb_desk_tables(full_year: bool = False) -> dict[str, pd.DataFrame]:
    year = synthetic_year()
    full = TimeSliceCalendar.full_year()
    tables = {
        "generation": _frame("generation", GENERATION),
        "power_storage": _frame("power_storage", POWER_STORAGE),
        "power_regions": _frame("power_regions", POWER_REGIONS),
        "power_capacity": _frame("power_capacity", POWER_CAPACITY),
        "power_links": _frame("power_links", POWER_LINKS),
        "power_periods": _frame("power_periods", POWER_PERIODS),
        "calendar": _frame("calendar", [(d, s, 1.0) for d, s in enumerate(full.day_season)]),
        "profiles": year,
        "h2_production": _frame("h2_production", H2_PRODUCTION),
        "conversion_coefficients": _frame("conversion_coefficients", CONVERSION),
        "heat_technologies": _frame("heat_technologies", HEAT_TECHNOLOGIES),
        "heat_seasonal_cop": _frame("heat_seasonal_cop", [
            (tech, s, round(cop * scale, 4)) for tech, scale in (("ashp", 1.0), ("hybrid", 3.03 / 3.04))
            for s, cop in SEASONAL_COP.items()]),
        "h2_storage": _frame("h2_storage", H2_STORAGE),
        "pipelines": _frame("pipelines", PIPELINES),
        "cells": _frame("cells", CELLS),
        "edges": _frame("edges", EDGES),
        "heat_slice_profile": heat_slice_profile(year, full),
    }
    if full_year:
        return tables
    from .io import reduce_calendar

    reduced = reduce_calendar(Scenario(MANIFEST, tables))
    profiles = reduced.profiles.copy()
    profiles["hour"] = np.arange(len(profiles))
    cal = reduced.calendar
    tables["profiles"] = profiles
    tables["calendar"] = _frame("calendar", [(d, s, w) for d, (s, w) in enumerate(zip(cal.day_season, cal.day_weight))])
    return tables


def gb_desk(full_year: bool = False) -> Scenario:
    manifest = dict(MANIFEST)
    if full_year:
        manifest["name"] = "gb-desk-year"
    return Scenario(manifest, gb_desk_tables(full_year))


def write_gb_desk(root: str | Path, full_year: bool = False) -> Path:
    from .io import save_scenario

    root = save_scenario(gb_desk(full_year), root)
    for table, header in HEADERS.items():
        path = root / f"{table}.csv"
        path.write_text(header + path.read_text())
    return root
