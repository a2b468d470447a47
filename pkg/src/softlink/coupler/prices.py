"""Power prices into RTN inputs: slice averaging and the retail transform."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..timeslice import N_SLICES, TimeSliceCalendar


class NegativePriceError(ValueError):
    pass


@dataclass(frozen=True)
class RetailTransform:
    ratio: float = 2.2
    cap: float = 528.0  # £/MWh

    def __post_init__(self):
        if self.ratio <= 0 or self.cap <= 0:
            raise ValueError("retail ratio and cap must be > 0")

    def __call__(self, wholesale):
        """Retail £/MWh for a non-negative wholesale price (scalar or array)."""
        p = np.asarray(wholesale, float)
        if np.any(p < 0) or np.any(np.isnan(p)):
            raise NegativePriceError("wholesale price must be >= 0; clamp curtailment hours first")
        out = np.minimum(self.ratio * p, self.cap)
        return float(out) if out.ndim == 0 else out


def wholesale_to_retail(price, transform: RetailTransform = RetailTransform()):
    return transform(price)


def clamp_negative(prices: np.ndarray) -> np.ndarray:
    """Curtailment hours can carry negative duals; they are treated as free power."""
    return np.maximum(np.asarray(prices, float), 0.0)


def aggregate_to_slices(hourly: np.ndarray, calendar: TimeSliceCalendar) -> np.ndarray:
    """Hour-weighted mean of a modelled-hour series within each of the 16 slices.

    On a full-year calendar every weight is 1, so this is the plain mean of
    the slice's member hours. Slices without member hours come back as NaN.
    """
    hourly = np.asarray(hourly, float)
    if hourly.shape != (calendar.n_hours,):
        raise ValueError(f"series has {hourly.size} values, calendar models {calendar.n_hours} hours")
    idx = calendar.hour_slice
    if idx.min() < 0 or idx.max() >= N_SLICES:
        raise ValueError("calendar maps an hour outside the 16 slices")
    w = calendar.hour_weight
    total = np.bincount(idx, weights=w * hourly, minlength=N_SLICES)
    hours = np.bincount(idx, weights=w, minlength=N_SLICES)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(hours > 0, total / np.where(hours > 0, hours, 1.0), np.nan)


def expand_slices(values, calendar: TimeSliceCalendar) -> np.ndarray:
    """Hourly series holding each hour's slice value."""
    return np.asarray(values, float)[calendar.hour_slice]


def retail_slice_prices(hourly_by_region: Mapping[str, np.ndarray], calendar: TimeSliceCalendar,
                        transform: RetailTransform = RetailTransform()) -> dict[str, np.ndarray]:
    out = {}
    for region, series in hourly_by_region.items():
        slices = aggregate_to_slices(clamp_negative(series), calendar)
        if np.isnan(slices).any():
            raise ValueError(f"region {region}: calendar leaves a slice without hours")
        out[region] = transform(slices)
    return out
