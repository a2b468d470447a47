"""Scenario inputs: typed CSV tables, a YAML manifest, validation and result writing."""

from .io import (
    DAYS_PER_SEASON, MANIFEST, OutputExistsError, ValidationReport, apply_calendar_file, load_scenario, prepare_output, read_prices_csv, reduce_calendar,
    save_scenario, validate, write_results,
)
from .model import DEFAULT_MANIFEST, TRAJECTORY_ANCHORS, Scenario, heat_demand_trajectory, merged_manifest
from .schema import SCHEMAS, Issue, ScenarioLoadError, read_table, write_table
from .synthetic import gb_desk, gb_desk_tables, synthetic_year, write_gb_desk

__all__ = [
    "DAYS_PER_SEASON", "DEFAULT_MANIFEST", "Issue", "MANIFEST", "OutputExistsError", "SCHEMAS", "Scenario", "ScenarioLoadError",
    "TRAJECTORY_ANCHORS", "ValidationReport", "apply_calendar_file", "gb_desk", "gb_desk_tables", "heat_demand_trajectory",
    "load_scenario", "merged_manifest", "prepare_output", "read_prices_csv", "read_table", "reduce_calendar",
    "save_scenario", "synthetic_year", "validate", "write_gb_desk", "write_results", "write_table",
]
