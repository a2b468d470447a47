"""The soft-linking loop between the power investment LP and the RTN MILP.

Iteration 1 runs the power model with all heat electrified (heat pumps only)
and hands its prices to the RTN. Every later iteration rebuilds the power
demands from the previous RTN mix and plan, re-solves power, and re-solves
the RTN on the new prices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Protocol

import numpy as np

from ..power import PowerCatalog, PowerSolutionSummary, PowerSystemInstance, build_power_model, summarise
from ..rtn import (
    HeatSupplyMix, HydrogenPlan, RtnInstance, build_rtn_model, extract_heat_mix, extract_hydrogen_plan,
)
from ..solver import SolverConfig, solve_lp, solve_mip, to_lp_format
from ..timeslice import TimeSliceCalendar
from .prices import RetailTransform, aggregate_to_slices, clamp_negative, expand_slices
from .spatial import PowerDemands, RegionMapping, aggregate_cells_to_regions, reconstruct_power_demands

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "max_iterations"
FAILED = "failed"


class CoupledScenario(Protocol):
    """What the loop needs from a scenario."""

    periods: tuple[int, ...]
    calendar: TimeSliceCalendar
    power_catalog: PowerCatalog
    region_mapping: RegionMapping
    retail: RetailTransform
    boiler_efficiency: float

    def rtn_instance(self) -> RtnInstance: ...

    def hourly_heat_demand(self, period: int) -> Mapping[tuple[str, str], np.ndarray]: ...

    def hourly_cop(self) -> Mapping[str, np.ndarray]: ...

    def power_instance(self, period: int, heat_electric, h2_electric, hydrogen_supply=None,
                       hydrogen_price=None) -> PowerSystemInstance: ...


@dataclass(frozen=True, eq=False)
class IterationRecord:
    iteration: int
    hourly_prices: dict[int, dict[str, np.ndarray]]  # wholesale £/MWh per modelled hour
    slice_prices: dict[int, dict[str, np.ndarray]]  # wholesale, 16 slices
    retail_prices: dict[int, dict[str, np.ndarray]]  # retail, 16 slices, as passed to the RTN
    power: dict[int, PowerSolutionSummary]
    demands: dict[int, PowerDemands]
    mix: HeatSupplyMix | None
    plan: HydrogenPlan | None
    rtn_objective: float = math.nan
    rtn_gap: float = math.nan
    rtn_flagged: bool = False
    max_share_change: float = math.inf
    max_price_change: float = math.inf

    @property
    def heat_electric_twh(self) -> dict[int, float]:
        return {p: s.heat_electric_twh for p, s in self.power.items()}

    @property
    def mean_price(self) -> dict[int, float]:
        return {p: s.mean_price for p, s in self.power.items()}


@dataclass(eq=False)
class CouplingState:
    history: list[IterationRecord] = field(default_factory=list)
    status: str = ""
    failure: str = ""
    failed_program: str = ""  # LP-format dump of the model that failed

    @property
    def iteration(self) -> int:
        return len(self.history)

    @property
    def latest(self) -> IterationRecord:
        return self.history[-1]

    @property
    def mix(self) -> HeatSupplyMix | None:
        return self.latest.mix if self.history else None

    @property
    def plan(self) -> HydrogenPlan | None:
        return self.latest.plan if self.history else None

    @property
    def prices(self) -> dict[int, dict[str, np.ndarray]]:
        return self.latest.slice_prices if self.history else {}

    @property
    def metrics(self) -> tuple[float, float]:
        if not self.history:
            return math.inf, math.inf
        return self.latest.max_share_change, self.latest.max_price_change

    def append(self, record: IterationRecord) -> None:
        if record.iteration != self.iteration + 1:
            raise ValueError("iterations must be appended in order")
        self.history.append(record)


class KeyMismatchError(KeyError):
    pass


def _share_table(mix: HeatSupplyMix):
    t = mix.table
    return t.set_index(["period", "location", "sector", "slice", "mode"]).share.sort_index()


def share_change(prev: HeatSupplyMix, new: HeatSupplyMix) -> float:
    a, b = _share_table(prev), _share_table(new)
    if set(a.index) != set(b.index):
        raise KeyMismatchError("heat mixes cover different keys")
    if a.empty:
        return 0.0
    return float((a - b.reindex(a.index)).abs().max())


def price_change(prev: Mapping[int, Mapping[str, np.ndarray]], new: Mapping[int, Mapping[str, np.ndarray]],
                 floor: float = 1.0) -> float:
    """Largest |new - old| / max(|old|, floor) over shared (period, region, slice)."""
    if set(prev) != set(new) or any(set(prev[p]) != set(new[p]) for p in prev):
        raise KeyMismatchError("price sets cover different periods or regions")
    worst = 0.0
    for p in prev:
        for r in prev[p]:
            old, cur = np.asarray(prev[p][r], float), np.asarray(new[p][r], float)
            if old.size:
                worst = max(worst, float(np.max(np.abs(cur - old) / np.maximum(np.abs(old), floor))))
    return worst


def convergence_metrics(prev, new) -> tuple[float, float]:
    """(max |Δshare|, max relative |Δprice|) between two iteration records or states."""
    prev = prev.latest if isinstance(prev, CouplingState) else prev
    new = new.latest if isinstance(new, CouplingState) else new
    return share_change(prev.mix, new.mix), price_change(prev.slice_prices, new.slice_prices)


def electrified_mix(instance: RtnInstance) -> HeatSupplyMix:
    """The bootstrap: every onshore cell's heat from heat pumps."""
    mix = HeatSupplyMix.uniform(instance.periods, [c.id for c in instance.cells if not c.offshore], "ashp")
    demand = {(c.id, sec, p): c.demand(sec, p) for c in instance.cells for sec in ("domestic", "commercial")
              for p in instance.periods}
    t = mix.table
    t["demand_gwh"] = [float(demand[k][s]) for k, s in zip(zip(t.location, t.sector, t.period), t.slice)]
    return mix


def _hydrogen_for_power(plan: HydrogenPlan | None, period: int, calendar: TimeSliceCalendar):
    """Spare RTN production capacity (MW H2) and its marginal cost, per modelled hour."""
    if plan is None or period not in plan.headroom:
        return None, None
    head = np.asarray(plan.headroom[period], float)
    cost = np.asarray(plan.marginal_cost.get(period, np.full(head.size, np.nan)), float)
    usable = np.where(np.isfinite(cost), head, 0.0)
    return expand_slices(usable, calendar), expand_slices(np.nan_to_num(cost, nan=0.0), calendar)


class SubSolveError(RuntimeError):
    def __init__(self, message: str, program: str):
        super().__init__(message)
        self.program = program


def _solve_power(scenario: CoupledScenario, mix_regions: HeatSupplyMix, plan_regions: HydrogenPlan | None,
                 plan_cells: HydrogenPlan | None, config: SolverConfig):
    summaries, hourly, demands = {}, {}, {}
    empty = HydrogenPlan()
    for p in scenario.periods:
        dem = reconstruct_power_demands(mix_regions, plan_regions if plan_regions is not None else empty,
                                        scenario.hourly_heat_demand(p), scenario.hourly_cop(), scenario.calendar, p,
                                        scenario.boiler_efficiency)
        supply, price = _hydrogen_for_power(plan_cells, p, scenario.calendar)
        inst = scenario.power_instance(p, dem.heat_electric, dem.h2_electric, supply, price)
        lp = build_power_model(inst, scenario.power_catalog)
        sol = solve_lp(lp, config)
        if not sol.optimal:
            raise SubSolveError(f"power model {p} is {sol.status}", to_lp_format(lp))
        summary = summarise(sol, inst, scenario.power_catalog)
        summaries[p], hourly[p], demands[p] = summary, summary.prices, dem
        log.info("power %s solved: mean price %.2f £/MWh, heat-electric %.2f TWh", p, summary.mean_price,
                 summary.heat_electric_twh)
    return summaries, hourly, demands


def _slice_prices(scenario: CoupledScenario, hourly):
    wholesale, retail = {}, {}
    for p, by_region in hourly.items():
        wholesale[p], retail[p] = {}, {}
        for r, series in by_region.items():
            wholesale[p][r] = aggregate_to_slices(series, scenario.calendar)
            retail[p][r] = scenario.retail(aggregate_to_slices(clamp_negative(series), scenario.calendar))
    return wholesale, retail


def run_coupled(scenario: CoupledScenario, max_iterations: int = 2, threshold: float = 0.01,
                config: SolverConfig | None = None, gap: float = 1e-3) -> CouplingState:
    """Iterate power -> prices -> RTN -> mix and plan -> power until converged or out of iterations."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    cfg = config or SolverConfig(backend="highs")
    inst = scenario.rtn_instance()
    mapping = scenario.region_mapping
    state = CouplingState()
    prev_mix = electrified_mix(inst)
    prev_plan: HydrogenPlan | None = None
    prev_prices = None
    for k in range(1, max_iterations + 1):
        log.info("iteration %d", k)
        try:
            if prev_plan is None:
                plan_regions, mix_regions = None, aggregate_cells_to_regions(HydrogenPlan(), prev_mix, mapping)[1]
            else:
                plan_regions, mix_regions = aggregate_cells_to_regions(prev_plan, prev_mix, mapping)
            power, hourly, demands = _solve_power(scenario, mix_regions, plan_regions, prev_plan, cfg)
            wholesale, retail = _slice_prices(scenario, hourly)
            mip = build_rtn_model(inst, retail)
            sol = solve_mip(mip, gap, cfg)
            if not sol.has_incumbent:
                raise SubSolveError(f"RTN model is {sol.status}", to_lp_format(mip.lp, mip.integer))
        except SubSolveError as exc:
            state.status, state.failure, state.failed_program = FAILED, str(exc), exc.program
            log.error("iteration %d failed: %s", k, exc)
            return state
        mix = extract_heat_mix(sol, inst)
        plan = extract_hydrogen_plan(sol, inst, retail)
        d_share = share_change(prev_mix, mix)
        d_price = price_change(prev_prices, wholesale) if prev_prices is not None else math.inf
        state.append(IterationRecord(k, hourly, wholesale, retail, power, demands, mix, plan, sol.objective, sol.gap,
                                     sol.flagged, d_share, d_price))
        log.info("iteration %d: max share change %.4g, max price change %.4g", k, d_share, d_price)
        if d_share < threshold and d_price < threshold:
            state.status = CONVERGED
            return state
        prev_mix, prev_plan, prev_prices = mix, plan, wholesale
    state.status = MAX_ITERATIONS
    return state
