"""Multi-period hydrogen/heat network MILP.

Resources (heat, hydrogen, electricity, gas, biomass, CO2) are balanced in
every (cell, slice, period). Flow variables are average rates over a slice:
MW for energy, t/h for CO2. Costs are in £m, discounted to the first period;
operating costs recur for every year of a period.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from ..solver import MixedIntegerProgram, ProgramBuilder
from ..timeslice import DAILY_PERIODS, N_SLICES, SEASONS, period_hours
from .types import SECTORS, ConversionTechnology, RtnInstance

log = logging.getLogger(__name__)

RetailPrices = Mapping[int, Mapping[str, Sequence[float]]]  # period -> region -> 16 £/MWh
IMPORTS = ("electricity", "gas", "biomass")
N_PERIODS_PER_DAY = len(DAILY_PERIODS)


class MissingPriceError(KeyError):
    pass


def npv(stream: Sequence[float], rate: float, spacing: float = 10.0) -> float:
    """Present value of per-period cash flows; entry k falls k x spacing years out."""
    if rate < 0:
        raise ValueError("discount rate must be >= 0")
    return float(sum(v * (1.0 + rate) ** (-spacing * k) for k, v in enumerate(stream)))


def emission_caps(baseline: float, periods: Sequence[int] = (2030, 2040, 2050), base_year: int = 2020,
                  zero_year: int = 2050) -> dict[int, float]:
    """Caps falling linearly from ``baseline`` in ``base_year`` to zero in ``zero_year``.

    Each period takes the value at its start year.
    """
    if baseline < 0:
        raise ValueError("baseline emissions must be >= 0")
    span = zero_year - base_year
    return {p: baseline * max(0.0, min(1.0, (zero_year - p) / span)) for p in periods}


def season_of(slice_: int) -> str:
    return SEASONS[slice_ // N_PERIODS_PER_DAY]


def alive(built: int, now: int, lifetime: float) -> bool:
    return 0 <= now - built < lifetime


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def co2_diagnostics(inst: RtnInstance) -> list[str]:
    """Cells that could capture CO2 but have no path to any injection cell."""
    capture = [t for t in inst.conversion if t.co2_captured > 0]
    if not capture:
        return []
    wells = [s for s in inst.storage if s.kind == "co2_well"]
    sinks = {c.id for c in inst.cells if c.offshore} if wells else set()
    g = nx.Graph()
    g.add_nodes_from(c.id for c in inst.cells)
    carriers = {p.carrier for p in inst.pipelines}
    for e in inst.edges:
        if ("co2_offshore" if e.offshore else "co2_onshore") in carriers:
            g.add_edge(e.a, e.b)
    out = []
    for c in inst.cells:
        if c.offshore:
            continue
        if not any(nx.has_path(g, c.id, s) for s in sinks if s in g):
            out.append(f"cell {c.id}: CO2 producer has no path to an injection cell")
    return out


def _check_prices(inst: RtnInstance, prices: RetailPrices) -> None:
    for p in inst.periods:
        if p not in prices:
            raise MissingPriceError(f"no retail prices for period {p}")
        for r in inst.regions:
            series = prices[p].get(r)
            if series is None:
                raise MissingPriceError(f"no retail prices for period {p}, region {r}")
            if len(series) != N_SLICES or any(not math.isfinite(v) for v in series):
                raise MissingPriceError(f"retail prices for period {p}, region {r} must be 16 finite values")


def national_prices(inst: RtnInstance, by_period: Mapping[int, Sequence[float]]) -> dict[int, dict[str, np.ndarray]]:
    """Broadcast one 16-slice series per period to every region."""
    return {p: {r: np.asarray(v, float) for r in inst.regions} for p, v in by_period.items()}


@dataclass(frozen=True)
class Discounting:
    rate: float
    base: int
    years: int

    def factor(self, period: int) -> float:
        return (1.0 + self.rate) ** -(period - self.base)

    def annual(self, period: int) -> float:
        """Present value of 1 £/yr paid in each year of the period."""
        return self.factor(period) * sum((1.0 + self.rate) ** -t for t in range(self.years))


def discounting(inst: RtnInstance) -> Discounting:
    s = inst.settings
    return Discounting(s.discount_rate, s.base_year if s.base_year is not None else inst.periods[0], s.period_years)


def cavern_phases(inst: RtnInstance) -> list[tuple[str, str, float]]:
    """Calendar order for inter-seasonal inventory: (phase, season, days)."""
    d = inst.calendar.season_days
    half = d["autumn_spring"] / 2.0
    return [("winter", "winter", d["winter"]), ("winter_peak", "winter_peak", d["winter_peak"]),
            ("spring", "autumn_spring", half), ("summer", "summer", d["summer"]),
            ("autumn", "autumn_spring", half)]


def legacy_gas_capacity(inst: RtnInstance, cell_id: str, sector: str, period: int) -> float:
    """MW of surviving gas boilers: the first period's peak slice load times survival."""
    frac = inst.settings.legacy_gas_survival.get(period, 0.0)
    if frac <= 0:
        return 0.0
    demand = inst.cell(cell_id).demand(sector, inst.periods[0])
    return frac * float(np.max(demand * 1000.0 / inst.slice_hours))


def conversion_opex(tech: ConversionTechnology, inst: RtnInstance, electricity_price: float, season: str) -> float:
    """£ per MWh of H2 from fuel and power purchases plus variable O&M."""
    s = inst.settings
    return (tech.gas * s.gas_price[season] + tech.electricity * electricity_price
            + tech.biomass * s.biomass_price + tech.variable_om)


def build_rtn_model(instance, retail_prices: RetailPrices) -> MixedIntegerProgram:
    """Build the RTN MILP. ``instance`` is an RtnInstance or anything with ``rtn_instance()``."""
    inst: RtnInstance = instance.rtn_instance() if hasattr(instance, "rtn_instance") else instance
    _check_prices(inst, retail_prices)
    for msg in co2_diagnostics(inst):
        log.warning(msg)
    st = inst.settings
    disc = discounting(inst)
    n_s = inst.slice_hours
    hours_dp = period_hours()
    SCALE = 1e-6
    b = ProgramBuilder("rtn")
    onshore = [c for c in inst.cells if not c.offshore]
    offshore = [c for c in inst.cells if c.offshore]
    slices = range(N_SLICES)

    # each balance accumulates terms here; rows are emitted at the end
    bal: dict[tuple, dict[str, float]] = {}

    def add(key, var, coef):
        row = bal.setdefault(key, {})
        row[var] = row.get(var, 0.0) + coef

    def row_nonempty(name, terms, rel, rhs):
        if terms or rhs != 0:
            b.row(name, terms, rel, rhs)

    emissions: dict[int, dict[str, float]] = {p: {} for p in inst.periods}

    # imports of electricity, gas and biomass (priced per slice)
    for p in inst.periods:
        ann = disc.annual(p) * SCALE
        for c in onshore:
            prices = np.asarray(retail_prices[p][c.region], float)
            for s in slices:
                season = season_of(s)
                unit_price = {"electricity": prices[s], "gas": st.gas_price[season], "biomass": st.biomass_price}
                for res in IMPORTS:
                    v = b.var(f"import[{res},{c.id},{s},{p}]", cost=n_s[s] * unit_price[res] * ann)
                    add((res, c.id, s, p), v, 1.0)

    # end-use heat
    for tech in inst.heat:
        if not tech.new_build:
            continue
        for c in onshore:
            for sec in SECTORS:
                for p in inst.periods:
                    b.var(f"heatcap[{tech.name},{c.id},{sec},{p}]", cost=tech.capex * 1e-3 * disc.factor(p))
    for c in onshore:
        for sec in SECTORS:
            for p in inst.periods:
                dem = c.demand(sec, p) * 1000.0 / n_s  # MW
                for s in slices:
                    season = season_of(s)
                    key = ("heat", c.id, sec, s, p)
                    for tech in inst.heat:
                        for mode in tech.modes:
                            upper = math.inf
                            if not tech.new_build:
                                upper = tech.mode_share * (legacy_gas_capacity(inst, c.id, sec, p)
                                                           if tech.name == "gas_boiler" else 0.0)
                            v = b.var(f"heat[{mode},{c.id},{sec},{s},{p}]", 0.0, upper)
                            add(key, v, 1.0)
                            if mode in ("ashp", "hybrid_elec"):
                                add(("electricity", c.id, s, p), v, -1.0 / tech.cop_in(season))
                            elif mode in ("h2_boiler", "hybrid_h2"):
                                add(("h2", c.id, s, p), v, -1.0 / tech.efficiency)
                            elif mode == "gas_boiler":
                                add(("gas", c.id, s, p), v, -1.0 / tech.efficiency)
                                emissions[p][v] = n_s[s] * st.gas_emission_factor / tech.efficiency * SCALE
                            if tech.new_build:
                                terms = {v: 1.0}
                                for q in inst.periods:
                                    if alive(q, p, tech.lifetime):
                                        terms[f"heatcap[{tech.name},{c.id},{sec},{q}]"] = -tech.mode_share
                                b.row(f"heatcap[{mode},{c.id},{sec},{s},{p}]", terms, "<=", 0.0)
                    b.row(f"heat[{c.id},{sec},{s},{p}]", bal.pop(key, {}), "=", float(dem[s]))

    # hydrogen production
    build: dict[int, dict[str, float]] = {p: {} for p in inst.periods}
    for tech in inst.conversion:
        for c in onshore:
            for p in inst.periods:
                # bounded by the build-rate row only, so that row carries the shadow price
                u = b.var(f"units[{tech.name},{c.id},{p}]", 0, math.inf,
                          tech.capex_for(p) * tech.unit_capacity * disc.factor(p), integer=True)
                build[p][u] = tech.unit_capacity
            for p in inst.periods:
                ann = disc.annual(p) * SCALE
                for s in slices:
                    v = b.var(f"prod[{tech.name},{c.id},{s},{p}]", cost=n_s[s] * tech.variable_om * ann)
                    add(("h2", c.id, s, p), v, 1.0)
                    if tech.gas:
                        add(("gas", c.id, s, p), v, -tech.gas)
                    if tech.electricity:
                        add(("electricity", c.id, s, p), v, -tech.electricity)
                    if tech.biomass:
                        add(("biomass", c.id, s, p), v, -tech.biomass)
                    if tech.co2_captured:
                        add(("co2", c.id, s, p), v, tech.co2_captured)
                    ef = tech.residual_emission + tech.electricity * st.electricity_emission_factor.get(p, 0.0)
                    if ef:
                        emissions[p][v] = n_s[s] * ef * SCALE
                    terms = {v: 1.0}
                    for q in inst.periods:
                        if alive(q, p, tech.lifetime):
                            terms[f"units[{tech.name},{c.id},{q}]"] = -1000.0 * tech.unit_capacity
                    b.row(f"prodcap[{tech.name},{c.id},{s},{p}]", terms, "<=", 0.0)
    if inst.conversion:
        for p in inst.periods:
            b.row(f"build_rate[{p}]", build[p], "<=", st.build_rate * st.period_years)

    # pipelines
    for e in inst.edges:
        a, bb = _pair(e.a, e.b)
        options = [o for o in inst.pipelines
                   if (o.carrier == "co2_offshore") == e.offshore]
        for res in ("h2", "co2"):
            opts = [o for o in options if o.resource == res]
            if not opts:
                continue
            loss = max(o.loss for o in opts) * e.km / 100.0
            for o in opts:
                for p in inst.periods:
                    b.var(f"pipe[{o.name},{a},{bb},{p}]", 0, o.max_units, o.capex * e.km * 1e-3 * disc.factor(p),
                          integer=True)
            for p in inst.periods:
                for s in slices:
                    for src, dst in ((a, bb), (bb, a)):
                        f = b.var(f"flow[{res},{src},{dst},{s},{p}]")
                        add((res, src, s, p), f, -1.0)
                        add((res, dst, s, p), f, 1.0 - loss)
                        terms = {f: 1.0}
                        for o in opts:
                            for q in inst.periods:
                                if q <= p:
                                    terms[f"pipe[{o.name},{a},{bb},{q}]"] = -o.flow_capacity
                        b.row(f"pipecap[{res},{src},{dst},{s},{p}]", terms, "<=", 0.0)

    # hydrogen stores
    caverns = [a for a in inst.storage if a.kind == "cavern"]
    vessels = [a for a in inst.storage if a.kind == "vessel"]
    for pool, assets, cells in (("cavern", caverns, [c for c in onshore if c.cavern]), ("vessel", vessels, onshore)):
        if not assets:
            continue
        for c in cells:
            for a in assets:
                for p in inst.periods:
                    b.var(f"store[{a.name},{c.id},{p}]", 0, a.max_units, a.capex * disc.factor(p), integer=a.integer)

            def built(p, attr):
                return {f"store[{a.name},{c.id},{q}]": getattr(a, attr) for a in assets for q in inst.periods if q <= p}

            for p in inst.periods:
                for s in slices:
                    inj = b.var(f"inject[{pool},{c.id},{s},{p}]")
                    wd = b.var(f"withdraw[{pool},{c.id},{s},{p}]")
                    add(("h2", c.id, s, p), inj, -1.0)
                    add(("h2", c.id, s, p), wd, 1.0)
                    b.row(f"injcap[{pool},{c.id},{s},{p}]", {inj: 1.0, **{k: -v for k, v in built(p, "injectivity").items()}},
                          "<=", 0.0)
                    b.row(f"wdcap[{pool},{c.id},{s},{p}]",
                          {wd: 1.0, **{k: -v for k, v in built(p, "deliverability").items()}}, "<=", 0.0)
                cap_terms = {k: -1000.0 * v for k, v in built(p, "capacity").items()}

                def net(season, upto):
                    """Net injection (MWh) over the first ``upto`` daily periods of a day in ``season``."""
                    out = {}
                    base = SEASONS.index(season) * N_PERIODS_PER_DAY
                    for k in range(upto):
                        s = base + k
                        out[f"inject[{pool},{c.id},{s},{p}]"] = hours_dp[k]
                        out[f"withdraw[{pool},{c.id},{s},{p}]"] = -hours_dp[k]
                    return out

                if pool == "cavern":
                    phases = cavern_phases(inst)
                    for phase, _, _ in phases:
                        b.var(f"level[{pool},{c.id},{phase},{p}]")
                    for i, (phase, season, days) in enumerate(phases):
                        nxt = phases[(i + 1) % len(phases)][0]
                        terms = {f"level[{pool},{c.id},{nxt},{p}]": 1.0, f"level[{pool},{c.id},{phase},{p}]": -1.0}
                        for k, v in net(season, N_PERIODS_PER_DAY).items():
                            terms[k] = terms.get(k, 0.0) - days * v
                        b.row(f"levellink[{pool},{c.id},{phase},{p}]", terms, "=", 0.0)
                        day_marks = (0.0,) if days <= 1 else (0.0, days - 1.0)
                        for d_i, d in enumerate(day_marks):
                            for k in range(1, N_PERIODS_PER_DAY + 1):
                                terms = {f"level[{pool},{c.id},{phase},{p}]": 1.0}
                                for var, v in net(season, N_PERIODS_PER_DAY).items():
                                    terms[var] = terms.get(var, 0.0) + d * v
                                for var, v in net(season, k).items():
                                    terms[var] = terms.get(var, 0.0) + v
                                b.row(f"levello[{pool},{c.id},{phase},{d_i},{k},{p}]", terms, ">=", 0.0)
                                b.row(f"levelhi[{pool},{c.id},{phase},{d_i},{k},{p}]", {**terms, **cap_terms},
                                      "<=", 0.0)
                else:
                    for season in SEASONS:
                        lv = b.var(f"level[{pool},{c.id},{season},{p}]")
                        b.row(f"daycycle[{pool},{c.id},{season},{p}]", net(season, N_PERIODS_PER_DAY), "=", 0.0)
                        for k in range(1, N_PERIODS_PER_DAY):
                            terms = {lv: 1.0, **net(season, k)}
                            b.row(f"levello[{pool},{c.id},{season},{k},{p}]", terms, ">=", 0.0)
                            b.row(f"levelhi[{pool},{c.id},{season},{k},{p}]", {**terms, **cap_terms}, "<=", 0.0)
                        b.row(f"levelhi[{pool},{c.id},{season},0,{p}]", {lv: 1.0, **cap_terms}, "<=", 0.0)

    # CO2 injection wells offshore
    wells = [a for a in inst.storage if a.kind == "co2_well"]
    for c in offshore:
        for a in wells:
            for p in inst.periods:
                b.var(f"store[{a.name},{c.id},{p}]", 0, a.max_units, a.capex * disc.factor(p), integer=True)
        if not wells:
            continue
        for p in inst.periods:
            for s in slices:
                v = b.var(f"sequester[{c.id},{s},{p}]")
                add(("co2", c.id, s, p), v, -1.0)
                terms = {v: 1.0}
                for a in wells:
                    for q in inst.periods:
                        if q <= p:
                            terms[f"store[{a.name},{c.id},{q}]"] = -a.injectivity
                b.row(f"wellcap[{c.id},{s},{p}]", terms, "<=", 0.0)

    # resource balances
    for c in inst.cells:
        for p in inst.periods:
            for s in slices:
                for res in ("h2", "co2", *IMPORTS):
                    terms = bal.pop((res, c.id, s, p), {})
                    if terms:
                        b.row(f"{res}[{c.id},{s},{p}]", terms, "=", 0.0)
    assert not bal, f"unbalanced terms left: {list(bal)[:3]}"

    for p in inst.periods:
        if p in inst.emissions.caps:
            row_nonempty(f"emission[{p}]", emissions[p], "<=", inst.emissions.caps[p])
    return b.build_mip()

