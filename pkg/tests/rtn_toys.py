"""Small RTN instances for unit tests."""

from __future__ import annotations

import numpy as np

from softlink.rtn import (
    Cell, ConversionTechnology, Edge, EmissionTrajectory, HeatTechnology, PipelineOption, RtnInstance, RtnSettings,
    StorageAsset, co2_well_rate,
)
from softlink.timeslice import N_SLICES, SEASONS, TimeSliceCalendar

PERIODS = (2030, 2040, 2050)
COP = {"winter": 2.6, "winter_peak": 2.0, "autumn_spring": 3.04, "summer": 3.4}

GAS_BOILER = HeatTechnology("gas_boiler", capex=0.0, efficiency=0.9, new_build=False)
H2_BOILER = HeatTechnology("h2_boiler", capex=200.0, efficiency=0.9)
ASHP = HeatTechnology("ashp", capex=800.0, cop=3.0, seasonal_cop=COP)
HYBRID = HeatTechnology("hybrid", capex=950.0, efficiency=0.9, cop=3.0, seasonal_cop=COP)

SMR = ConversionTechnology("smr", unit_capacity=0.5, capex={p: 500.0 for p in PERIODS}, gas=1.30, electricity=0.02,
                           co2_captured=0.22, residual_emission=0.015)
UNABATED_SMR = ConversionTechnology("smr_unabated", unit_capacity=0.5, capex={p: 300.0 for p in PERIODS}, gas=1.30,
                                    electricity=0.02, residual_emission=0.24)
CAVERN = StorageAsset("cavern", "cavern", capex=60.0, capacity=300.0, injectivity=200.0, deliverability=500.0)
VESSEL = StorageAsset("vessel", "vessel", capex=4.0, capacity=2.0, injectivity=100.0, deliverability=100.0)
WELL = StorageAsset("well", "co2_well", capex=30.0, injectivity=co2_well_rate(1.5))
H2_PIPE = PipelineOption("h2_12in", "h2", 12, capex=600.0, max_flow=20.0, loss=0.0)
CO2_ON = PipelineOption("co2_on_12in", "co2_onshore", 12, capex=500.0, max_flow=80.0, loss=0.0)
CO2_OFF = PipelineOption("co2_off_12in", "co2_offshore", 12, capex=1500.0, max_flow=80.0, loss=0.0)


def profile(total_gwh: float, shape: np.ndarray | None = None) -> tuple[float, ...]:
    """Spread an annual total over the 16 slices in proportion to slice hours x shape."""
    n_s = TimeSliceCalendar.one_day_per_season().nominal_slice_hours()
    shape = np.ones(N_SLICES) if shape is None else np.asarray(shape, float)
    w = n_s * shape
    return tuple(total_gwh * w / w.sum())


def winter_heavy() -> np.ndarray:
    by_season = {"winter": 2.0, "winter_peak": 3.0, "autumn_spring": 1.0, "summer": 0.3}
    return np.repeat([by_season[s] for s in SEASONS], 4)


def cell(cid: str = "a", region: str = "r", annual_gwh: float = 1000.0, **kw) -> Cell:
    demand = {}
    for p in PERIODS:
        demand["domestic", p] = profile(annual_gwh * 0.7, winter_heavy())
        demand["commercial", p] = profile(annual_gwh * 0.3, winter_heavy())
    return Cell(cid, 0.0, 0.0, region, demand, **kw)


def instance(cells=None, heat=(GAS_BOILER, ASHP), conversion=(), storage=(), pipelines=(), edges=(),
             caps=None, **settings) -> RtnInstance:
    cells = tuple(cells) if cells is not None else (cell(),)
    caps = caps if caps is not None else {p: 1e6 for p in PERIODS}
    return RtnInstance(PERIODS, TimeSliceCalendar.one_day_per_season(), cells, tuple(edges), tuple(conversion),
                       tuple(heat), tuple(storage), tuple(pipelines), EmissionTrajectory(max(caps.values()), caps),
                       RtnSettings(**settings))


def flat_prices(inst: RtnInstance, price: float = 100.0) -> dict[int, dict[str, np.ndarray]]:
    return {p: {r: np.full(N_SLICES, price) for r in inst.regions} for p in inst.periods}


def edge(a: str, b: str, km: float = 50.0, offshore: bool = False) -> Edge:
    return Edge(a, b, km, offshore)
