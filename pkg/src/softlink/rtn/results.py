"""Reading heat mixes, hydrogen plans and audits out of a solved RTN."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from ..solver import MipSolution
from ..timeslice import N_SLICES
from .model import RetailPrices, alive, cavern_phases, conversion_opex, season_of
from .types import (
    DISPATCH_COLUMNS, FLOW_COLUMNS, HEAT_MODES, PIPELINE_COLUMNS, PRODUCTION_COLUMNS, SECTORS, STORAGE_COLUMNS,
    HeatSupplyMix, HydrogenPlan, RtnInstance,
)


class NoIncumbentError(ValueError):
    pass


def _inst(instance) -> RtnInstance:
    return instance.rtn_instance() if hasattr(instance, "rtn_instance") else instance


def _values(solution: MipSolution) -> dict[str, float]:
    if not solution.has_incumbent:
        raise NoIncumbentError(f"RTN solution has no incumbent (status {solution.status})")
    return solution.values


def heat_capacity(values: Mapping[str, float], inst: RtnInstance, cell: str, sector: str, period: int) -> dict[str, float]:
    """Installed MW per heat-supply mode (hybrid split half/half) in a period."""
    from .model import legacy_gas_capacity

    out = dict.fromkeys(HEAT_MODES, 0.0)
    for tech in inst.heat:
        if tech.new_build:
            mw = sum(values.get(f"heatcap[{tech.name},{cell},{sector},{q}]", 0.0)
                     for q in inst.periods if alive(q, period, tech.lifetime))
        else:
            mw = legacy_gas_capacity(inst, cell, sector, period) if tech.name == "gas_boiler" else 0.0
        for mode in tech.modes:
            out[mode] += tech.mode_share * mw
    return out


def extract_heat_mix(solution: MipSolution, instance) -> HeatSupplyMix:
    """Shares of slice heat demand by supply mode for every onshore cell.

    In a slice without demand the shares follow installed capacity; with no
    capacity installed either, the slice is assigned wholly to heat pumps.
    """
    inst = _inst(instance)
    v = _values(solution)
    n_s = inst.slice_hours
    rows = []
    for c in inst.cells:
        if c.offshore:
            continue
        for p in inst.periods:
            for sec in SECTORS:
                demand = c.demand(sec, p)
                cap = None
                for s in range(N_SLICES):
                    out = np.array([v.get(f"heat[{m},{c.id},{sec},{s},{p}]", 0.0) for m in HEAT_MODES])
                    if demand[s] > 0:
                        shares = out * n_s[s] / 1000.0 / demand[s]
                        shares = np.clip(shares, 0.0, None)
                        shares = shares / shares.sum() if shares.sum() > 0 else shares
                    else:
                        if cap is None:
                            cap = np.array(list(heat_capacity(v, inst, c.id, sec, p).values()))
                        if cap.sum() > 0:
                            shares = cap / cap.sum()
                        else:
                            shares = np.array([1.0 if m == "ashp" else 0.0 for m in HEAT_MODES])
                    for m, share in zip(HEAT_MODES, shares):
                        rows.append((p, c.id, sec, s, m, float(share), float(demand[s])))
    return HeatSupplyMix(pd.DataFrame(rows, columns=list(HeatSupplyMix.COLUMNS)))


def _round(x: float) -> int:
    return int(round(x))


def extract_hydrogen_plan(solution: MipSolution, instance, retail_prices: RetailPrices | None = None) -> HydrogenPlan:
    inst = _inst(instance)
    v = _values(solution)
    production, storage, pipes, dispatch, flows = [], [], [], [], []
    headroom = {p: np.zeros(N_SLICES) for p in inst.periods}
    marginal = {p: np.full(N_SLICES, np.nan) for p in inst.periods}

    for tech in inst.conversion:
        for c in inst.cells:
            if c.offshore:
                continue
            for p in inst.periods:
                built = _round(v.get(f"units[{tech.name},{c.id},{p}]", 0.0))
                total = sum(_round(v.get(f"units[{tech.name},{c.id},{q}]", 0.0))
                            for q in inst.periods if alive(q, p, tech.lifetime))
                if total:
                    production.append((p, tech.name, c.id, built, total, total * tech.unit_capacity))
                for s in range(N_SLICES):
                    out = v.get(f"prod[{tech.name},{c.id},{s},{p}]", 0.0)
                    if total:
                        headroom[p][s] += max(0.0, 1000.0 * total * tech.unit_capacity - out)
                    if out > 1e-9:
                        dispatch.append((p, tech.name, c.id, s, out, out * tech.electricity))

    for a in inst.storage:
        for c in inst.cells:
            for p in inst.periods:
                built = v.get(f"store[{a.name},{c.id},{p}]", 0.0)
                total = sum(v.get(f"store[{a.name},{c.id},{q}]", 0.0) for q in inst.periods if q <= p)
                if a.integer:
                    built, total = _round(built), _round(total)
                if total > 1e-9:
                    storage.append((p, a.name, c.id, built, total, total * a.capacity))

    seen = set()
    for e in inst.edges:
        a, b = sorted((e.a, e.b))
        for o in inst.pipelines:
            if (o.carrier == "co2_offshore") != e.offshore:
                continue
            for p in inst.periods:
                built = _round(v.get(f"pipe[{o.name},{a},{b},{p}]", 0.0))
                total = sum(_round(v.get(f"pipe[{o.name},{a},{b},{q}]", 0.0)) for q in inst.periods if q <= p)
                if total:
                    pipes.append((p, o.carrier, o.name, o.diameter, a, b, built, total, total * o.flow_capacity))
        if (a, b) in seen:
            continue
        seen.add((a, b))
        for res in ("h2", "co2"):
            for p in inst.periods:
                for s in range(N_SLICES):
                    for src, dst in ((a, b), (b, a)):
                        f = v.get(f"flow[{res},{src},{dst},{s},{p}]", 0.0)
                        if f > 1e-9:
                            flows.append((p, res, src, dst, s, f))

    if retail_prices is not None:
        for p in inst.periods:
            for s in range(N_SLICES):
                if headroom[p][s] <= 0:
                    continue
                elec = float(np.mean([retail_prices[p][r][s] for r in inst.regions]))
                costs = [conversion_opex(t, inst, elec, season_of(s)) for t in inst.conversion
                         if any(r[0] == p and r[1] == t.name for r in production)]
                if costs:
                    marginal[p][s] = min(costs)

    def frame(rows, cols):
        return pd.DataFrame(rows, columns=list(cols)) if rows else pd.DataFrame({c: [] for c in cols})

    return HydrogenPlan(
        production=frame(production, PRODUCTION_COLUMNS),
        storage=frame(storage, STORAGE_COLUMNS),
        pipelines=frame(pipes, PIPELINE_COLUMNS),
        dispatch=frame(dispatch, DISPATCH_COLUMNS),
        flows=frame(flows, FLOW_COLUMNS),
        headroom=headroom,
        marginal_cost=marginal,
    )


# audits, recomputed from primal values without looking at the rows


def audit_emissions(solution: MipSolution, instance) -> dict[int, float]:
    """Net annual emissions (Mt) per period from dispatch."""
    inst = _inst(instance)
    v = _values(solution)
    st = inst.settings
    n_s = inst.slice_hours
    gas = inst.heat_tech("gas_boiler")
    out = {}
    for p in inst.periods:
        t = 0.0
        for c in inst.cells:
            for s in range(N_SLICES):
                if gas is not None:
                    for sec in SECTORS:
                        t += n_s[s] * v.get(f"heat[gas_boiler,{c.id},{sec},{s},{p}]", 0.0) / gas.efficiency \
                            * st.gas_emission_factor
                for tech in inst.conversion:
                    prod = v.get(f"prod[{tech.name},{c.id},{s},{p}]", 0.0)
                    ef = tech.residual_emission + tech.electricity * st.electricity_emission_factor.get(p, 0.0)
                    t += n_s[s] * prod * ef
        out[p] = t / 1e6
    return out


def audit_build_rate(solution: MipSolution, instance) -> dict[int, float]:
    """GW of new production capacity per period."""
    inst = _inst(instance)
    v = _values(solution)
    return {p: sum(t.unit_capacity * v.get(f"units[{t.name},{c.id},{p}]", 0.0) for t in inst.conversion
                   for c in inst.cells) for p in inst.periods}


def audit_resource_balance(solution: MipSolution, instance) -> float:
    """Largest absolute residual of any resource balance, rebuilt from the model structure."""
    from .model import build_rtn_model, national_prices

    inst = _inst(instance)
    v = _values(solution)
    zero = national_prices(inst, {p: np.zeros(N_SLICES) for p in inst.periods})
    lp = build_rtn_model(inst, zero).lp
    worst = 0.0
    for c in lp.constraints:
        head = c.name.split("[", 1)[0]
        if head in ("h2", "co2", "electricity", "gas", "biomass", "heat"):
            lhs = sum(coef * v.get(name, 0.0) for name, coef in c.coeffs)
            scale = max(1.0, abs(c.rhs))
            worst = max(worst, abs(lhs - c.rhs) / scale)
    return worst


def audit_co2(solution: MipSolution, instance) -> dict[int, tuple[float, float, float]]:
    """(captured, injected, pipeline losses) in Mt/yr per period."""
    inst = _inst(instance)
    v = _values(solution)
    n_s = inst.slice_hours
    km = {tuple(sorted((e.a, e.b))): e for e in inst.edges}
    loss_rate = {}
    for (a, b), e in km.items():
        opts = [o for o in inst.pipelines if o.resource == "co2" and (o.carrier == "co2_offshore") == e.offshore]
        loss_rate[a, b] = max((o.loss for o in opts), default=0.0) * e.km / 100.0
    out = {}
    for p in inst.periods:
        cap = inj = lost = 0.0
        for s in range(N_SLICES):
            for c in inst.cells:
                for t in inst.conversion:
                    cap += n_s[s] * t.co2_captured * v.get(f"prod[{t.name},{c.id},{s},{p}]", 0.0)
                inj += n_s[s] * v.get(f"sequester[{c.id},{s},{p}]", 0.0)
            for (a, b), rate in loss_rate.items():
                for src, dst in ((a, b), (b, a)):
                    lost += n_s[s] * rate * v.get(f"flow[co2,{src},{dst},{s},{p}]", 0.0)
        out[p] = (cap / 1e6, inj / 1e6, lost / 1e6)
    return out


def cavern_levels(solution: MipSolution, instance, cell: str, period: int) -> dict[str, float]:
    inst = _inst(instance)
    v = _values(solution)
    return {ph: v.get(f"level[cavern,{cell},{ph},{period}]", 0.0) for ph, _, _ in cavern_phases(inst)}


def write_heat_mix_csv(mix: HeatSupplyMix, path: str | Path) -> Path:
    path = Path(path)
    mix.table.sort_values(["period", "location", "sector", "slice", "mode"]).to_csv(
        path, index=False, float_format="%.9g")
    return path


def write_plan_csvs(plan: HydrogenPlan, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    out = []
    for name in ("production", "storage", "pipelines", "dispatch", "flows"):
        path = directory / f"h2_{name}.csv"
        getattr(plan, name).to_csv(path, index=False, float_format="%.9g")
        out.append(path)
    return out
