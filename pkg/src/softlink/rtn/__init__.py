"""Hydrogen and heat network planning: build the MILP and read back mixes and plans."""

from .model import (
    Discounting, MissingPriceError, RetailPrices, build_rtn_model, cavern_phases, co2_diagnostics, conversion_opex,
    discounting, emission_caps, legacy_gas_capacity, national_prices, npv, season_of,
)
from .results import (
    NoIncumbentError, audit_build_rate, audit_co2, audit_emissions, audit_resource_balance, cavern_levels,
    extract_heat_mix, extract_hydrogen_plan, heat_capacity, write_heat_mix_csv, write_plan_csvs,
)
from .types import (
    ELECTRIC_MODES, HEAT_MODES, HYDROGEN_MODES, SECTORS, Cell, ConversionTechnology, Edge, EmissionTrajectory,
    HeatSupplyMix, HeatTechnology, HydrogenPlan, PipelineOption, RtnInstance, RtnSettings, StorageAsset,
    co2_well_rate,
)

__all__ = [
    "Cell", "ConversionTechnology", "Discounting", "ELECTRIC_MODES", "Edge", "EmissionTrajectory", "HEAT_MODES",
    "HYDROGEN_MODES", "HeatSupplyMix", "HeatTechnology", "HydrogenPlan", "MissingPriceError", "NoIncumbentError",
    "PipelineOption", "RetailPrices", "RtnInstance", "RtnSettings", "SECTORS", "StorageAsset", "audit_build_rate",
    "audit_co2", "audit_emissions", "audit_resource_balance", "build_rtn_model", "cavern_levels", "cavern_phases",
    "co2_diagnostics", "co2_well_rate", "conversion_opex", "discounting", "emission_caps", "extract_heat_mix",
    "extract_hydrogen_plan", "heat_capacity", "legacy_gas_capacity", "national_prices", "npv", "season_of",
    "write_heat_mix_csv", "write_plan_csvs",
]
