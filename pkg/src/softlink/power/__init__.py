"""Electricity investment model: build, solve, and read back prices and summaries."""

from .model import (
    AdequacyRequirement, EmptyCatalogError, InconsistentProfileError, adequacy_requirement, balance_row,
    build_power_model, cap_var, gen_var,
)
from .results import (
    EmissionReport, MissingRowError, NotOptimalError, compute_emissions, emission_intensity, extract_hourly_prices,
    hourly_balance_residual, prices_frame, summarise, summary_frame, write_prices_csv,
)
from .types import (
    GenerationTechnology, PowerCatalog, PowerPolicy, PowerSolutionSummary, PowerSystemInstance, StorageTechnology,
    TransferLink, annuity_factor,
)

__all__ = [
    "AdequacyRequirement", "EmissionReport", "EmptyCatalogError", "GenerationTechnology", "InconsistentProfileError",
    "MissingRowError", "NotOptimalError", "PowerCatalog", "PowerPolicy", "PowerSolutionSummary",
    "PowerSystemInstance", "StorageTechnology", "TransferLink", "adequacy_requirement", "annuity_factor",
    "balance_row", "build_power_model", "cap_var", "compute_emissions", "emission_intensity",
    "extract_hourly_prices", "gen_var", "hourly_balance_residual", "prices_frame", "summarise", "summary_frame",
    "write_prices_csv",
]
