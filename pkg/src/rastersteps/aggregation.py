"""NaN-aware per-step aggregation and the statistical variation cost."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, EmptyDataError
from .grids import Dataset, FocusRange, Region


class AggregationKind(str, enum.Enum):
    MAX = "max"
    MIN = "min"
    AVG = "avg"

    @classmethod
    def parse(cls, text: str) -> "AggregationKind":
        try:
            return cls(text.lower())
        except ValueError:
            raise BoundsError(f"aggregation must be max, min or avg, got {text!r}") from None


@dataclass(frozen=True)
class AggregatedSeries:
    """Per-step aggregate of a region, raw and range-normalized."""

    kind: AggregationKind
    region: Region | None
    values: np.ndarray      # raw aggregates; NaN where the region is all-NaN
    normalized: np.ndarray  # values mapped to [0, 1] within the series


_REDUCERS = {
    AggregationKind.MAX: np.nanmax,
    AggregationKind.MIN: np.nanmin,
    AggregationKind.AVG: np.nanmean,
}


def aggregate_cube(cube: np.ndarray, kind: AggregationKind) -> np.ndarray:
    """Per-step NaN-aware reduction of a (t, h, w) stack to t scalars.

    A step whose cells are all NaN aggregates to NaN; neighbors are
    unaffected.
    """
    flat = cube.reshape(cube.shape[0], -1)
    reducer = _REDUCERS[kind]
    with warnings.catch_warnings():
        # all-NaN steps intentionally reduce to NaN
        warnings.simplefilter("ignore", category=RuntimeWarning)
        return reducer(flat, axis=1)


def aggregate_values(
    dataset: Dataset,
    range_: FocusRange,
    region: Region | None,
    kind: AggregationKind,
) -> np.ndarray:
    """Raw per-step aggregates over ``range_`` (inclusive)."""
    range_.validate(dataset.t)
    sub = dataset.region_cube(region)[range_.start : range_.end + 1]
    return aggregate_cube(sub, kind)


def normalize_series(values: np.ndarray) -> np.ndarray:
    """Scale a series into [0, 1] using its NaN-aware extrema.

    NaN entries stay NaN; a constant series maps to all zeros so the
    statistical cost stays neutral rather than undefined.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0 or np.all(np.isnan(values)):
        raise EmptyDataError("series has no finite entries to normalize")
    lo = np.nanmin(values)
    hi = np.nanmax(values)
    if hi == lo:
        return np.where(np.isnan(values), np.nan, 0.0)
    return (values - lo) / (hi - lo)


def aggregate(
    dataset: Dataset,
    range_: FocusRange,
    region: Region | None,
    kind: AggregationKind,
) -> AggregatedSeries:
    values = aggregate_values(dataset, range_, region, kind)
    return AggregatedSeries(kind, region, values, normalize_series(values))


def statistical_cost(vi: float, vj: float) -> float:
    """Cost of pairing two normalized aggregates; NaN pairs cost the maximum.

    Large gaps are rewarded (cost falls toward 1 - tanh(1)); missing data is
    never rewarded.
    """
    if np.isnan(vi) or np.isnan(vj):
        return 1.0
    return float(-np.tanh(abs(vi - vj)) + 1.0)


def statistical_cost_matrix(normalized: np.ndarray) -> np.ndarray:
    """T x T matrix of statistical costs for a normalized series."""
    v = np.asarray(normalized, dtype=np.float64)
    gaps = np.abs(v[:, None] - v[None, :])
    cost = 1.0 - np.tanh(gaps)
    cost[np.isnan(cost)] = 1.0
    return cost
