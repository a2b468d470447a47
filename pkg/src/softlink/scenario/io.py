"""Loading, validating, saving scenarios and writing coupled-run results."""

from __future__ import annotations

import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from ..coupler import CouplingState, write_manifest, write_snapshot
from ..rtn import co2_diagnostics
from ..timeslice import SEASONS, TimeSliceCalendar
from .model import Scenario
from .schema import SCHEMAS, Issue, ScenarioLoadError, read_table, write_table

MANIFEST = "manifest.yaml"


def _table_path(root: Path, manifest: dict, table: str) -> Path:
    files = manifest.get("files") or {}
    return root / files.get(table, f"{table}.csv")


def load_scenario(root: str | Path) -> Scenario:
    """Read a scenario directory; raises ScenarioLoadError listing every problem found."""
    root = Path(root)
    if not root.is_dir():
        raise ScenarioLoadError([Issue("error", str(root), "scenario directory does not exist")])
    path = root / MANIFEST
    if not path.exists():
        raise ScenarioLoadError([Issue("error", str(root), f"missing manifest ({MANIFEST})")])
    try:
        manifest = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ScenarioLoadError([Issue("error", MANIFEST, f"cannot parse YAML: {exc}")]) from None
    if not isinstance(manifest, dict):
        raise ScenarioLoadError([Issue("error", MANIFEST, "manifest must be a mapping")])
    issues, tables = [], {}
    for table in SCHEMAS:
        frame, found = read_table(_table_path(root, manifest, table), table)
        tables[table] = frame
        issues.extend(found)
    errors = [i for i in issues if i.severity == "error"]
    if errors:
        raise ScenarioLoadError(issues)
    return Scenario(manifest, tables, str(root))


def save_scenario(scenario: Scenario, root: str | Path) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest = dict(scenario.manifest)
    manifest.pop("files", None)
    (root / MANIFEST).write_text(yaml.safe_dump(manifest, sort_keys=True))
    for table, frame in scenario.tables.items():
        write_table(frame, root / f"{table}.csv")
    return root


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = field(default_factory=tuple)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        lines = [str(i) for i in self.issues]
        lines.append(f"{len(self.errors)} error(s), {len(self.warnings)} warning(s)")
        return "\n".join(lines)


def _check(issues: list, location: str, problems) -> None:
    issues.extend(Issue("error", location, p) for p in problems)


def validate(scenario: Scenario) -> ValidationReport:
    """Check every type invariant and the cross-table consistency of a loaded scenario."""
    issues: list[Issue] = []
    s = scenario.settings
    try:
        cal = scenario.calendar
        _check(issues, "calendar", cal.validate())
    except Exception as exc:  # a broken calendar should not hide the other findings
        issues.append(Issue("error", "calendar", str(exc)))
        cal = None

    for name in ("ratio", "cap"):
        if not float(s["retail"][name]) > 0:
            issues.append(Issue("error", "manifest: retail", f"{name} must be > 0"))
    split = s["heat"]["sector_split"]
    if abs(sum(float(v) for v in split.values()) - 1.0) > 1e-9:
        issues.append(Issue("error", "manifest: heat.sector_split", "sector shares must sum to 1"))
    if not 0 < float(s["heat"]["boiler_efficiency"]) <= 1:
        issues.append(Issue("error", "manifest: heat.boiler_efficiency", "must lie in (0, 1]"))
    missing_gas = [x for x in SEASONS if x not in s["prices"]["gas"]]
    if missing_gas:
        issues.append(Issue("error", "manifest: prices.gas", f"missing seasons {missing_gas}"))

    for g in scenario.power_catalog.generation:
        _check(issues, f"generation.csv: {g.name}", g.problems())
    for st in scenario.power_catalog.storage:
        _check(issues, f"power_storage.csv: {st.name}", st.problems())
    for t in scenario.conversion:
        _check(issues, f"h2_production.csv: {t.name}", t.problems())
        missing = [p for p in scenario.periods if p not in t.capex]
        if missing:
            issues.append(Issue("error", f"h2_production.csv: {t.name}", f"no capital cost for periods {missing}"))
    for t in scenario.heat_technologies:
        _check(issues, f"heat_technologies.csv: {t.name}", t.problems())
    for a in scenario.storage_assets:
        _check(issues, f"h2_storage.csv: {a.name}", a.problems())
    for o in scenario.pipelines:
        _check(issues, f"pipelines.csv: {o.name}", o.problems())
    for c in scenario.cells:
        _check(issues, f"cells.csv: {c.id}", c.problems())
    _check(issues, "emission trajectory", scenario.emissions.problems())

    regions = set(scenario.regions)
    shares = scenario.tables["power_regions"].baseline_share
    if abs(float(shares.sum()) - 1.0) > 1e-9:
        issues.append(Issue("error", "power_regions.csv", "baseline shares must sum to 1"))
    cells = {c.id: c for c in scenario.cells}
    for c in scenario.cells:
        if not c.offshore and c.region not in regions:
            issues.append(Issue("error", f"cells.csv: {c.id}", f"region {c.region} is not a power region"))
    _check(issues, "cells.csv", scenario.region_mapping.problems(scenario.cells, scenario.regions))
    onshore_share = sum(float(r.heat_share) for r in scenario.tables["cells"].itertuples(index=False)
                        if not r.offshore)
    if abs(onshore_share - 1.0) > 1e-9:
        issues.append(Issue("error", "cells.csv", f"onshore heat shares sum to {onshore_share:g}, expected 1"))

    seen: dict[tuple[str, str], float] = {}
    for e in scenario.edges:
        for end in (e.a, e.b):
            if end not in cells:
                issues.append(Issue("error", f"edges.csv: {e.a}-{e.b}", f"unknown cell {end}"))
        key = tuple(sorted((e.a, e.b)))
        if key in seen and seen[key] != e.km:
            issues.append(Issue("error", f"edges.csv: {e.a}-{e.b}", "distances are not symmetric"))
        seen[key] = e.km
        if e.km <= 0:
            issues.append(Issue("error", f"edges.csv: {e.a}-{e.b}", "distance must be > 0"))

    for r in scenario.tables["power_capacity"].itertuples(index=False):
        if r.region not in regions:
            issues.append(Issue("error", f"power_capacity.csv: {r.technology}", f"unknown region {r.region}"))
    periods = set(scenario.tables["power_periods"].period.astype(int))
    for p in scenario.periods:
        if p not in periods:
            issues.append(Issue("error", "power_periods.csv", f"no row for period {p}"))

    if cal is not None:
        n = len(scenario.tables["profiles"])
        if scenario.override_hours is None and n != cal.n_hours:
            issues.append(Issue("error", "profiles.csv", f"{n} rows but the calendar models {cal.n_hours} hours"))
        for g in scenario.power_catalog.generation:
            if g.renewable:
                for r in scenario.regions:
                    if f"{g.profile}_{r}" not in scenario.tables["profiles"].columns:
                        issues.append(Issue("error", "profiles.csv", f"no column {g.profile}_{r} for {g.name}"))

    if not issues or all(i.severity != "error" for i in issues):
        try:
            for msg in co2_diagnostics(scenario.rtn_instance()):
                issues.append(Issue("warning", "cells.csv", msg))
        except Exception as exc:
            issues.append(Issue("error", "rtn", str(exc)))
    return ValidationReport(tuple(sorted(set(issues))))


DAYS_PER_SEASON = {"winter": 3, "winter_peak": 1, "autumn_spring": 2, "summer": 2}


def reduce_calendar(scenario: Scenario, days_per_season: dict[str, int] | None = None) -> Scenario:
    """Representative days per season, each weighted by the days it stands for.

    A season's days are ranked by total (baseline + heat) load and cut into
    equal-count bins; each bin keeps the day closest to its mean load. The peak
    season keeps its highest-load day.
    """
    per = {**DAYS_PER_SEASON, **(days_per_season or {})}
    cal = scenario.calendar
    prof = scenario.tables["profiles"].sort_values("hour").reset_index(drop=True)
    load = (prof.baseline + prof.heat_domestic + prof.heat_commercial).to_numpy(float)
    daily = load.reshape(cal.n_days, 24).sum(axis=1)
    days, seasons, weights = [], [], []
    for season in SEASONS:
        members = [d for d, s in enumerate(cal.day_season) if s == season]
        if not members:
            raise ValueError(f"calendar has no {season} day to represent")
        if season == "winter_peak":
            bins, picks = [members], [max(members, key=lambda d: (daily[d], -d))]
        else:
            ranked = sorted(members, key=lambda d: (daily[d], d))
            k = max(1, min(int(per[season]), len(ranked)))
            bins = [list(b) for b in np.array_split(np.array(ranked), k)]
            picks = [min(b, key=lambda d: (abs(daily[d] - daily[b].mean()), d)) for b in bins]
        for pick, members_of_bin in zip(picks, bins):
            days.append(pick)
            seasons.append(season)
            weights.append(float(sum(cal.day_weight[d] for d in members_of_bin)))
    order = np.argsort(days, kind="stable")
    days = [days[i] for i in order]
    hours = np.concatenate([np.arange(24 * d, 24 * d + 24) for d in days])
    reduced = TimeSliceCalendar(tuple(seasons[i] for i in order), tuple(weights[i] for i in order),
                                cal.season_days)
    return Scenario(scenario.manifest, scenario.tables, scenario.root, reduced, hours)


def apply_calendar_file(scenario: Scenario, path: str | Path) -> Scenario:
    """Restrict a scenario to the days listed in a calendar CSV (day, season, weight)."""
    table, issues = read_table(Path(path), "calendar")
    errors = [i for i in issues if i.severity == "error"]
    if errors:
        raise ScenarioLoadError(errors)
    table = table.sort_values("day")
    n_days = len(scenario.tables["profiles"]) // 24
    bad = [int(d) for d in table.day if not 0 <= d < n_days]
    if bad:
        raise ScenarioLoadError([Issue("error", Path(path).name, f"days {bad} are outside the profile year")])
    reduced = TimeSliceCalendar(tuple(table.season), tuple(float(w) for w in table.weight), scenario.season_days)
    hours = np.concatenate([np.arange(24 * d, 24 * d + 24) for d in table.day.astype(int)])
    return Scenario(scenario.manifest, scenario.tables, scenario.root, reduced, hours)


class OutputExistsError(FileExistsError):
    pass


def prepare_output(out: str | Path, force: bool = False) -> Path:
    out = Path(out)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise OutputExistsError(f"{out} exists; use --force to overwrite")
        shutil.rmtree(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_results(state: CouplingState, out: str | Path, force: bool = False,
                  scenario: Scenario | None = None) -> Path:
    """Per-iteration CSV snapshots, a final copy, and manifest.json; returns the manifest path."""
    out = prepare_output(out, force)
    files: list[Path] = []
    for record in state.history:
        files += write_snapshot(record, out / f"iteration_{record.iteration}")
    if state.history:
        files += write_snapshot(state.latest, out / "final")
    if state.failed_program:
        path = out / "failed_model.lp"
        path.write_text(state.failed_program)
        files.append(path)
    extra = {"scenario": scenario.name} if scenario is not None else None
    return write_manifest(state, out, files, extra)


def read_prices_csv(path: str | Path, periods, regions) -> dict[int, dict[str, np.ndarray]]:
    """Retail slice prices from a CSV with columns period, region, slice, retail (or price)."""
    t = pd.read_csv(path)
    col = "retail" if "retail" in t.columns else "price"
    missing = {"period", "region", "slice", col} - set(t.columns)
    if missing:
        raise ValueError(f"{Path(path).name}: missing columns {sorted(missing)}")
    out = {}
    for p in periods:
        out[p] = {}
        for r in regions:
            hit = t[(t.period == p) & (t.region == r)].sort_values("slice")
            values = np.full(16, math.nan)
            values[hit.slice.to_numpy(int)] = hit[col].to_numpy(float)
            out[p][r] = values
    return out



