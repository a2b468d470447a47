"""Power investment LP: capacities and hourly operation optimised together.

Every hour carries a weight (the number of calendar days its representative
day stands for), so operating costs and annual energy sums are weighted while
capacities are annual. The balance row of region r at hour h is named
``balance[r,h]``; its dual divided by the hour weight is the price in £/MWh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..solver import LinearProgram, ProgramBuilder
from .types import PowerCatalog, PowerSystemInstance


class InconsistentProfileError(ValueError):
    """A series does not have one value per modelled hour."""


class EmptyCatalogError(ValueError):
    pass


def balance_row(region: str, h: int) -> str:
    return f"balance[{region},{h}]"


def gen_var(tech: str, region: str, h: int) -> str:
    return f"gen[{tech},{region},{h}]"


def cap_var(tech: str, region: str) -> str:
    return f"cap[{tech},{region}]"


@dataclass(frozen=True)
class AdequacyRequirement:
    peak_demand: float  # MW
    margin: float
    requirement: float  # MW of derated capacity
    derating: dict[str, float]

    def firm_contribution(self, capacities: dict[str, float]) -> float:
        """Derated capacity (MW) of a {technology: MW} mapping."""
        return sum(self.derating.get(name, 0.0) * mw for name, mw in capacities.items())


def adequacy_requirement(instance: PowerSystemInstance, catalog: PowerCatalog) -> AdequacyRequirement:
    """Firm-capacity target: derated capacity >= peak demand x (1 + margin)."""
    margin = instance.policy.adequacy_margin or 0.0
    total = instance.total_demand()
    peak = float(total.max()) if total.size else 0.0
    derating = {g.name: g.derating for g in catalog.generation}
    derating.update({s.name: s.derating for s in catalog.storage})
    return AdequacyRequirement(peak, margin, max(peak, 0.0) * (1.0 + margin), derating)


def _cyclic_blocks(instance: PowerSystemInstance) -> list[np.ndarray]:
    per_day = instance.policy.battery_cyclic_per_day
    if per_day is None:
        per_day = not instance.calendar.is_full_year
    if per_day:
        return instance.calendar.day_blocks()
    return [np.arange(instance.n_hours)]


def _check(instance: PowerSystemInstance, catalog: PowerCatalog) -> None:
    if not catalog.generation and not catalog.storage:
        raise EmptyCatalogError("power technology catalog is empty")
    problems = instance.problems()
    lengths = [p for p in problems if "length" in p]
    if lengths:
        raise InconsistentProfileError("; ".join(lengths))
    if problems:
        raise ValueError("; ".join(problems))
    for g in catalog.generation:
        if g.renewable:
            for r in instance.regions:
                if (g.name, r) not in instance.capacity_factors and instance.max_capacity.get((g.name, r), math.inf) > 0:
                    raise InconsistentProfileError(f"no capacity-factor profile for {g.name} in {r}")


def build_power_model(instance: PowerSystemInstance, catalog: PowerCatalog) -> LinearProgram:
    _check(instance, catalog)
    pol = instance.policy
    H = instance.n_hours
    hours = range(H)
    w = instance.calendar.hour_weight
    regions = instance.regions
    b = ProgramBuilder(f"power_{instance.period}")

    h2_supply = instance.hydrogen_supply
    h2_price = instance.hydrogen_price if instance.hydrogen_price is not None else np.zeros(H)
    h2_available = h2_supply is not None and float(np.max(h2_supply, initial=0.0)) > 0

    # capacities
    for g in catalog.generation:
        for r in regions:
            lo = instance.existing_capacity.get((g.name, r), 0.0)
            hi = instance.max_capacity.get((g.name, r), math.inf)
            if g.hydrogen_fuelled and not h2_available:
                hi = lo
            b.var(cap_var(g.name, r), lo, max(lo, hi), g.annualised_cost())
    for s in catalog.storage:
        for r in regions:
            lo = instance.existing_capacity.get((s.name, r), 0.0)
            hi = instance.max_capacity.get((s.name, r), math.inf)
            b.var(cap_var(s.name, r), lo, max(lo, hi), s.annualised_cost())

    balance: dict[tuple[str, int], dict[str, float]] = {(r, h): {} for r in regions for h in hours}
    reserve_terms: dict[int, dict[str, float]] = {h: {} for h in hours}
    renewable_terms: dict[int, dict[str, float]] = {h: {} for h in hours}

    for g in catalog.generation:
        for r in regions:
            cap = cap_var(g.name, r)
            cf = instance.capacity_factors.get((g.name, r)) if g.renewable else None
            for h in hours:
                cost = w[h] * g.variable_cost
                if g.hydrogen_fuelled:
                    cost += w[h] * g.heat_rate * h2_price[h]
                gv = b.var(gen_var(g.name, r, h), cost=cost)
                balance[r, h][gv] = 1.0
                terms = {gv: 1.0, cap: -(cf[h] if cf is not None else 1.0)}
                if pol.reserve and g.reserve_capable and not g.renewable:
                    rv = b.var(f"res[{g.name},{r},{h}]")
                    terms[rv] = 1.0
                    reserve_terms[h][rv] = 1.0
                if g.renewable:
                    renewable_terms[h][gv] = 1.0
                b.row(f"avail[{g.name},{r},{h}]", terms, "<=", 0.0)

    for s in catalog.storage:
        for r in regions:
            cap = cap_var(s.name, r)
            for h in hours:
                ch = b.var(f"charge[{s.name},{r},{h}]")
                dis = b.var(f"discharge[{s.name},{r},{h}]")
                b.var(f"soc[{s.name},{r},{h}]")
                balance[r, h][ch] = -1.0
                balance[r, h][dis] = 1.0
                b.row(f"chmax[{s.name},{r},{h}]", {ch: 1.0, cap: -1.0}, "<=", 0.0)
                dterms = {dis: 1.0, cap: -1.0}
                if pol.reserve:
                    rv = b.var(f"bres[{s.name},{r},{h}]")
                    dterms[rv] = 1.0
                    reserve_terms[h][rv] = 1.0
                    b.row(f"bresenergy[{s.name},{r},{h}]", {rv: 1.0, f"soc[{s.name},{r},{h}]": -1.0}, "<=", 0.0)
                b.row(f"dismax[{s.name},{r},{h}]", dterms, "<=", 0.0)
                b.row(f"socmax[{s.name},{r},{h}]", {f"soc[{s.name},{r},{h}]": 1.0, cap: -s.duration}, "<=", 0.0)
            for block in _cyclic_blocks(instance):
                for i, h in enumerate(block):
                    prev = block[i - 1]  # first hour wraps to the block's last
                    b.row(f"storage[{s.name},{r},{h}]", {
                        f"soc[{s.name},{r},{h}]": 1.0,
                        f"soc[{s.name},{r},{prev}]": -1.0,
                        f"charge[{s.name},{r},{h}]": -s.efficiency,
                        f"discharge[{s.name},{r},{h}]": 1.0,
                    }, "=", 0.0)

    # transfers between regions
    for link in instance.links:
        exp = b.var(f"expand[{link.name}]", cost=link.reinforcement_cost)
        for h in hours:
            f = b.var(f"flow[{link.name},{h}]", -math.inf, math.inf)
            balance[link.region_a, h][f] = balance[link.region_a, h].get(f, 0.0) - 1.0
            balance[link.region_b, h][f] = balance[link.region_b, h].get(f, 0.0) + 1.0
            b.row(f"flowfwd[{link.name},{h}]", {f: 1.0, exp: -1.0}, "<=", link.capacity)
            b.row(f"flowrev[{link.name},{h}]", {f: -1.0, exp: -1.0}, "<=", link.capacity)

    # interconnectors to neighbouring markets
    neutral: dict[str, float] = {}
    for r in regions:
        ic = instance.interconnector_capacity.get(r, 0.0)
        if ic <= 0:
            continue
        for h in hours:
            vin = b.var(f"icin[{r},{h}]", 0, ic, w[h] * pol.interconnector_cost)
            vout = b.var(f"icout[{r},{h}]", 0, ic, w[h] * pol.interconnector_cost)
            balance[r, h][vin] = 1.0
            balance[r, h][vout] = -1.0
            neutral[vin] = w[h]
            neutral[vout] = -w[h]
    if neutral and pol.interconnector_energy_neutral:
        b.row("interconnector_neutral", neutral, "=", 0.0)

    demand = {r: instance.demand(r) for r in regions}
    if pol.value_of_lost_load is not None:
        for r in regions:
            for h in hours:
                if demand[r][h] > 0:
                    sv = b.var(f"shed[{r},{h}]", 0, demand[r][h], w[h] * pol.value_of_lost_load)
                    balance[r, h][sv] = 1.0

    for r in regions:
        for h in hours:
            b.row(balance_row(r, h), balance[r, h], "=", float(demand[r][h]))

    total = instance.total_demand()
    if pol.reserve and any(reserve_terms.values()):
        for h in hours:
            if pol.largest_unit > 0:
                b.row(f"reserve_unit[{h}]", reserve_terms[h], ">=", pol.largest_unit)
            req = pol.reserve_demand_fraction * total[h]
            terms = dict(reserve_terms[h])
            for gv in renewable_terms[h]:
                terms[gv] = -pol.reserve_renewable_fraction
            if terms or req > 0:
                b.row(f"reserve_share[{h}]", terms, ">=", req)

    if pol.adequacy_margin is not None:
        req = adequacy_requirement(instance, catalog)
        terms = {}
        for g in catalog.generation:
            for r in regions:
                terms[cap_var(g.name, r)] = g.derating
        for s in catalog.storage:
            for r in regions:
                terms[cap_var(s.name, r)] = s.derating
        b.row("adequacy", terms, ">=", req.requirement)

    if instance.carbon_cap is not None:
        terms = {}
        for g in catalog.generation:
            if g.carbon_intensity > 0:
                for r in regions:
                    for h in hours:
                        terms[gen_var(g.name, r, h)] = w[h] * g.carbon_intensity / 1000.0
        annual = float(w @ total)
        b.row("carbon", terms, "<=", instance.carbon_cap / 1000.0 * annual)

    h2_gens = [g for g in catalog.generation if g.hydrogen_fuelled]
    if h2_gens and h2_available:
        for h in hours:
            terms = {}
            for g in h2_gens:
                for r in regions:
                    terms[gen_var(g.name, r, h)] = g.heat_rate
            b.row(f"h2_fuel[{h}]", terms, "<=", float(h2_supply[h]))
        b.row("h2_capacity", {cap_var(g.name, r): g.heat_rate for g in h2_gens for r in regions},
              "<=", float(np.max(h2_supply)))

    if pol.distribution_cost > 0:
        for r in regions:
            need = max(0.0, float(demand[r].max(initial=0.0)) - instance.distribution_capacity.get(r, 0.0))
            b.var(f"distribution[{r}]", need, need, pol.distribution_cost)

    return b.build()


def sunk_cost(instance: PowerSystemInstance, catalog: PowerCatalog) -> float:
    """Annuitised capital of pre-existing capacity (in the objective, not a decision)."""
    total = 0.0
    for g in catalog.generation:
        for r in instance.regions:
            total += instance.existing_capacity.get((g.name, r), 0.0) * (g.annualised_cost() - 1000.0 * g.fixed_om)
    for s in catalog.storage:
        for r in instance.regions:
            total += instance.existing_capacity.get((s.name, r), 0.0) * (s.annualised_cost() - 1000.0 * s.fixed_om)
    return total

