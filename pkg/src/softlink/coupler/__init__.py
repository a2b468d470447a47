"""Soft-linking protocol: price hand-over, spatial aggregation, demand rebuild and the iteration loop."""

from .loop import (
    CONVERGED, FAILED, MAX_ITERATIONS, CoupledScenario, CouplingState, IterationRecord, KeyMismatchError,
    SubSolveError, convergence_metrics, electrified_mix, price_change, run_coupled, share_change,
)
from .prices import (
    NegativePriceError, RetailTransform, aggregate_to_slices, clamp_negative, expand_slices, retail_slice_prices,
    wholesale_to_retail,
)
from .snapshots import slice_price_frame, write_manifest, write_snapshot
from .spatial import (
    MissingShareError, PowerDemands, RegionMapping, UnmappedCellError, aggregate_cells_to_regions, aggregate_mix,
    aggregate_plan, reconstruct_power_demands,
)

__all__ = [
    "CONVERGED", "CoupledScenario", "CouplingState", "FAILED", "IterationRecord", "KeyMismatchError",
    "MAX_ITERATIONS", "MissingShareError", "NegativePriceError", "PowerDemands", "RegionMapping", "RetailTransform",
    "SubSolveError", "UnmappedCellError", "aggregate_cells_to_regions", "aggregate_mix", "aggregate_plan",
    "aggregate_to_slices", "clamp_negative", "convergence_metrics", "electrified_mix", "expand_slices",
    "price_change", "reconstruct_power_demands", "retail_slice_prices", "run_coupled", "share_change",
    "slice_price_frame", "wholesale_to_retail", "write_manifest", "write_snapshot",
]
