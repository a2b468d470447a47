"""CSV table schemas and typed parsing with file/row/column error reporting.

Column names carry their unit after a double underscore
(``capital_cost__gbp_per_kw``). A column whose stem matches but whose unit
differs is reported as a unit mismatch rather than a missing column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

TEXT, NUMBER, OPT_NUMBER, INTEGER, FLAG = "text", "number", "opt_number", "integer", "flag"


@dataclass(frozen=True, order=True)
class Issue:
    severity: str  # error or warning
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


class ScenarioLoadError(ValueError):
    def __init__(self, issues: list[Issue]):
        self.issues = sorted(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


SCHEMAS: dict[str, tuple[tuple[str, str], ...]] = {
    "generation": (
        ("name", TEXT), ("capital_cost__gbp_per_kw", NUMBER), ("fixed_om__gbp_per_kw_yr", NUMBER),
        ("discount_rate__pct", NUMBER), ("lifetime__yr", NUMBER), ("carbon_intensity__kg_per_mwh", NUMBER),
        ("variable_cost__gbp_per_mwh", NUMBER), ("derating", NUMBER), ("hydrogen_fuelled", FLAG),
        ("renewable", FLAG), ("heat_rate__mwh_per_mwh", NUMBER), ("profile", TEXT),
    ),
    "power_storage": (
        ("name", TEXT), ("capital_cost__gbp_per_kw", NUMBER), ("fixed_om__gbp_per_kw_yr", NUMBER),
        ("discount_rate__pct", NUMBER), ("lifetime__yr", NUMBER), ("duration__h", NUMBER), ("efficiency", NUMBER),
    ),
    "power_regions": (
        ("region", TEXT), ("baseline_share", NUMBER), ("interconnector__mw", NUMBER), ("distribution__mw", NUMBER),
    ),
    "power_capacity": (("technology", TEXT), ("region", TEXT), ("existing__mw", NUMBER), ("max__mw", OPT_NUMBER)),
    "power_links": (
        ("name", TEXT), ("region_a", TEXT), ("region_b", TEXT), ("capacity__mw", NUMBER),
        ("reinforcement_cost__gbp_per_mw_yr", NUMBER),
    ),
    "power_periods": (
        ("period", INTEGER), ("baseline_demand__twh", NUMBER), ("carbon_cap__g_per_kwh", OPT_NUMBER),
        ("grid_emission_factor__t_per_mwh", NUMBER), ("legacy_gas_survival", NUMBER),
    ),
    "calendar": (("day", INTEGER), ("season", TEXT), ("weight", NUMBER)),
    "profiles": (("hour", INTEGER), ("baseline", NUMBER), ("heat_domestic", NUMBER), ("heat_commercial", NUMBER)),
    "h2_production": (
        ("name", TEXT), ("unit_capacity__gw", NUMBER), ("capex_2020__gbp_per_kw", NUMBER),
        ("capex_2030__gbp_per_kw", NUMBER), ("capex_2040__gbp_per_kw", NUMBER), ("capex_2050__gbp_per_kw", NUMBER),
    ),
    "conversion_coefficients": (
        ("name", TEXT), ("gas__mwh", NUMBER), ("electricity__mwh", NUMBER), ("biomass__mwh", NUMBER),
        ("co2_captured__t", NUMBER), ("residual_emission__t", NUMBER), ("lifetime__yr", NUMBER),
        ("variable_om__gbp_per_mwh", NUMBER),
    ),
    "heat_technologies": (
        ("name", TEXT), ("capex__gbp_per_kwth", NUMBER), ("efficiency__pct", OPT_NUMBER), ("cop", OPT_NUMBER),
        ("new_build", FLAG), ("lifetime__yr", NUMBER),
    ),
    "heat_seasonal_cop": (("technology", TEXT), ("season", TEXT), ("cop", NUMBER)),
    "h2_storage": (
        ("name", TEXT), ("kind", TEXT), ("capex__gbp_m", NUMBER), ("capacity__gwh", OPT_NUMBER),
        ("injectivity__mw", OPT_NUMBER), ("injectivity__mt_per_yr", OPT_NUMBER), ("deliverability__mw", OPT_NUMBER),
        ("max_units", INTEGER),
    ),
    "pipelines": (
        ("name", TEXT), ("carrier", TEXT), ("diameter__inch", NUMBER), ("capex__gbpk_per_km", NUMBER),
        ("max_flow__kg_per_s", NUMBER), ("loss__pct_per_km", NUMBER),
    ),
    "cells": (
        ("id", TEXT), ("x__km", NUMBER), ("y__km", NUMBER), ("region", TEXT), ("cavern", FLAG), ("offshore", FLAG),
        ("heat_share", NUMBER),
    ),
    "edges": (("a", TEXT), ("b", TEXT), ("distance__km", NUMBER), ("offshore", FLAG)),
    "heat_slice_profile": (("sector", TEXT), ("season", TEXT), ("daily_period", TEXT), ("weight", NUMBER)),
}

# tables whose extra columns are allowed (profile series per region)
OPEN_TABLES = {"profiles"}


def _parse(value, kind: str):
    if kind == TEXT:
        return "" if value is None or (isinstance(value, float) and math.isnan(value)) else str(value).strip()
    blank = value is None or (isinstance(value, float) and math.isnan(value)) or str(value).strip() == ""
    if kind == OPT_NUMBER and blank:
        return None
    if blank:
        raise ValueError("value is empty")
    if kind == FLAG:
        text = str(value).strip().lower()
        if text in ("1", "true", "yes"):
            return True
        if text in ("0", "false", "no"):
            return False
        raise ValueError(f"{value!r} is not a flag (true/false)")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{value!r} is not a number") from None
    if not math.isfinite(number):
        raise ValueError(f"{value!r} is not finite")
    if kind == INTEGER:
        if number != int(number):
            raise ValueError(f"{value!r} is not an integer")
        return int(number)
    return number


def read_table(path: Path, table: str) -> tuple[pd.DataFrame, list[Issue]]:
    """Read and type one CSV; returns the typed frame and any issues found."""
    schema = SCHEMAS[table]
    issues: list[Issue] = []
    name = path.name
    if not path.exists():
        return pd.DataFrame(columns=[c for c, _ in schema]), [Issue("error", name, "missing file")]
    with open(path, encoding="utf-8", errors="replace") as fh:
        lead = 0
        for line in fh:
            if not line.startswith("#"):
                break
            lead += 1  # provenance comments above the header
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skiprows=lead)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        return pd.DataFrame(columns=[c for c, _ in schema]), [Issue("error", name, f"cannot parse CSV: {exc}")]
    raw.columns = [c.strip() for c in raw.columns]
    stems = {c.split("__")[0]: c for c in raw.columns}
    for col, _ in schema:
        if col in raw.columns:
            continue
        stem = col.split("__")[0]
        other = stems.get(stem)
        if other is not None and "__" in col:
            issues.append(Issue("error", f"{name}: column {other}",
                                f"unit mismatch: expected {col.split('__')[1]}, found {other.split('__', 1)[-1]}"))
        else:
            issues.append(Issue("error", f"{name}: row {lead + 1} (header)", f"missing column {col}"))
    if table not in OPEN_TABLES:
        known = {c for c, _ in schema}
        for col in raw.columns:
            if col not in known and col.split("__")[0] not in {c.split("__")[0] for c in known}:
                issues.append(Issue("warning", f"{name}: column {col}", "unknown column ignored"))
    if issues and any(i.severity == "error" for i in issues):
        return pd.DataFrame(columns=[c for c, _ in schema]), issues
    kinds = dict(schema)
    columns = [c for c, _ in schema] + ([c for c in raw.columns if c not in kinds] if table in OPEN_TABLES else [])
    records = []
    for i, row in enumerate(raw.to_dict("records"), start=lead + 2):  # file line numbers
        rec = {}
        for col in columns:
            try:
                rec[col] = _parse(row[col], kinds.get(col, NUMBER))
            except ValueError as exc:
                issues.append(Issue("error", f"{name}: row {i}, column {col}", str(exc)))
        records.append(rec)
    return pd.DataFrame.from_records(records, columns=columns), issues


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    return str(value)


def write_table(frame: pd.DataFrame, path: Path) -> None:
    out = frame.copy()
    for col in out.columns:
        out[col] = [format_value(v) for v in out[col]]
    out.to_csv(path, index=False)
