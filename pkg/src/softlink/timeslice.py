"""The 16-slice year: four seasons (incl. a winter peak day) x four daily periods.

A calendar is a sequence of modelled days, each tagged with a season and a
weight (the number of calendar days it stands for). A full year is 365 days
of weight 1; a reduced calendar is a handful of representative days whose
weights add up to the same season totals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SEASONS = ("winter", "winter_peak", "autumn_spring", "summer")
SEASON_DAYS = {"winter": 124, "winter_peak": 1, "autumn_spring": 85, "summer": 155}
DAILY_PERIODS = (("night", 0, 7), ("day", 7, 17), ("peak", 17, 20), ("evening", 20, 24))
DAYS_PER_YEAR = 365
N_SLICES = len(SEASONS) * len(DAILY_PERIODS)

# Day-of-year layout of the default full-year calendar (0-based, inclusive ranges).
PEAK_DAY_OF_YEAR = 24
_YEAR_LAYOUT = (
    ("winter", 0, 59),
    ("autumn_spring", 60, 102),
    ("summer", 103, 257),
    ("autumn_spring", 258, 299),
    ("winter", 300, 364),
)


def slice_index(season: str, period: str) -> int:
    s = SEASONS.index(season)
    p = [name for name, _, _ in DAILY_PERIODS].index(period)
    return s * len(DAILY_PERIODS) + p


def slice_label(k: int) -> str:
    season = SEASONS[k // len(DAILY_PERIODS)]
    period = DAILY_PERIODS[k % len(DAILY_PERIODS)][0]
    return f"{season}/{period}"


SLICE_LABELS = tuple(slice_label(k) for k in range(N_SLICES))


def period_hours() -> np.ndarray:
    """Hours in each daily period, in slice order within a day."""
    return np.array([end - start for _, start, end in DAILY_PERIODS], float)


@dataclass(frozen=True)
class TimeSliceCalendar:
    day_season: tuple[str, ...]
    day_weight: tuple[float, ...]
    season_days: dict[str, float] = field(default_factory=lambda: dict(SEASON_DAYS))
    daily_periods: tuple[tuple[str, int, int], ...] = DAILY_PERIODS

    @classmethod
    def full_year(cls, season_days: dict[str, float] | None = None) -> "TimeSliceCalendar":
        seasons = ["winter"] * DAYS_PER_YEAR
        for season, first, last in _YEAR_LAYOUT:
            for d in range(first, last + 1):
                seasons[d] = season
        seasons[PEAK_DAY_OF_YEAR] = "winter_peak"
        return cls(tuple(seasons), (1.0,) * DAYS_PER_YEAR, dict(season_days or SEASON_DAYS))

    @classmethod
    def representative(cls, days: Sequence[tuple[str, float]],
                       season_days: dict[str, float] | None = None) -> "TimeSliceCalendar":
        """Calendar of representative days given as ``(season, weight)`` pairs."""
        return cls(tuple(s for s, _ in days), tuple(float(w) for _, w in days), dict(season_days or SEASON_DAYS))

    @classmethod
    def one_day_per_season(cls, season_days: dict[str, float] | None = None) -> "TimeSliceCalendar":
        sd = dict(season_days or SEASON_DAYS)
        return cls.representative([(s, sd[s]) for s in SEASONS], sd)

    @property
    def n_days(self) -> int:
        return len(self.day_season)

    @property
    def n_hours(self) -> int:
        return 24 * self.n_days

    @property
    def is_full_year(self) -> bool:
        return self.n_days == DAYS_PER_YEAR and all(w == 1.0 for w in self.day_weight)

    @property
    def hour_of_day(self) -> np.ndarray:
        return np.tile(np.arange(24), self.n_days)

    @property
    def hour_day(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_days), 24)

    @property
    def hour_weight(self) -> np.ndarray:
        return np.repeat(np.asarray(self.day_weight, float), 24)

    @property
    def hour_season(self) -> np.ndarray:
        return np.repeat(np.array([SEASONS.index(s) for s in self.day_season]), 24)

    @property
    def hour_slice(self) -> np.ndarray:
        """Slice index (0..15) of every modelled hour."""
        hod = np.arange(24)
        period_of_hour = np.empty(24, int)
        for p, (_, start, end) in enumerate(self.daily_periods):
            period_of_hour[start:end] = p
        season = self.hour_season
        return season * len(self.daily_periods) + np.tile(period_of_hour[hod], self.n_days)

    def slice_member_hours(self) -> np.ndarray:
        """Number of year-hours each slice represents (weights applied)."""
        return np.bincount(self.hour_slice, weights=self.hour_weight, minlength=N_SLICES)

    def nominal_slice_hours(self) -> np.ndarray:
        """Year-hours per slice implied by the declared season day counts."""
        days = np.array([self.season_days[s] for s in SEASONS], float)
        return np.outer(days, period_hours()).ravel()

    def day_blocks(self) -> list[np.ndarray]:
        """Hour indices of each modelled day."""
        return [np.arange(24 * d, 24 * d + 24) for d in range(self.n_days)]

    def validate(self) -> list[str]:
        errors = []
        total = sum(self.season_days.get(s, 0) for s in SEASONS)
        if set(self.season_days) != set(SEASONS):
            errors.append(f"season set must be {SEASONS}, got {sorted(self.season_days)}")
        if abs(total - DAYS_PER_YEAR) > 1e-9:
            parts = " + ".join(f"{self.season_days.get(s, 0):g}" for s in SEASONS)
            errors.append(f"season day counts must satisfy the 365-day identity: {parts} = {total:g} != 365")
        if self.season_days.get("winter_peak") != 1:
            errors.append("the winter peak season must be exactly one day")
        covered = [0.0] * len(self.daily_periods)
        for p, (_, start, end) in enumerate(self.daily_periods):
            covered[p] = end - start
        hours = np.zeros(24, int)
        for _, start, end in self.daily_periods:
            hours[start:end] += 1
        if len(self.daily_periods) != 4 or not np.all(hours == 1):
            errors.append("daily periods must be four contiguous ranges covering every hour exactly once")
        if len(self.day_season) != len(self.day_weight):
            errors.append("day_season and day_weight lengths differ")
        unknown = sorted(set(self.day_season) - set(SEASONS))
        if unknown:
            errors.append(f"unknown seasons in calendar days: {unknown}")
        if any(w <= 0 for w in self.day_weight):
            errors.append("day weights must be positive")
        if not unknown:
            for s in SEASONS:
                w = sum(wt for ds, wt in zip(self.day_season, self.day_weight) if ds == s)
                if abs(w - self.season_days.get(s, 0)) > 1e-9:
                    errors.append(f"days tagged {s} carry weight {w:g}, expected {self.season_days.get(s, 0):g}")
        return errors
