"""Dataset-level orchestration: codes, cost matrices, selection and trends.

Bridges the storage layer to the optimizer: computes descriptor codes for a
(dataset, region) context, assembles the weighted cost matrix for a request
and translates between absolute frame indices and range-relative ones.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import features, selector
from .aggregation import AggregationKind, aggregate_values, normalize_series
from .errors import BoundsError
from .grids import Dataset, FocusRange, GridFrame, Region, normalize_cube
from .selector import SelectionParams, SelectionResult

STRUCTURAL_TREND = "structural"


def dataset_codes(dataset: Dataset, region: Region | None = None,
                  cfg: features.DescriptorConfig = features.DEFAULT_CONFIG) -> list[features.LatentCode]:
    """Descriptor codes for every frame, cropped to ``region`` if given."""
    cube = normalize_cube(dataset.region_cube(region), dataset.norm)
    filled = np.nan_to_num(cube, nan=0.0)
    return [features.pyramid_descriptor(GridFrame(filled[i]), cfg) for i in range(filled.shape[0])]


def structural_matrix_for_range(codes: list[features.LatentCode],
                                range_: FocusRange) -> np.ndarray:
    """Structural cost matrix restricted to the focus range."""
    if range_.end >= len(codes):
        raise BoundsError(f"range {range_.start}:{range_.end} outside {len(codes)} codes")
    return features.structural_cost_matrix(codes[range_.start : range_.end + 1])


def normalized_series_for_range(dataset: Dataset, params: SelectionParams) -> np.ndarray:
    values = aggregate_values(dataset, params.range, params.region, params.aggregation)
    return normalize_series(values)


def run_selection(dataset: Dataset, params: SelectionParams,
                  codes: list[features.LatentCode] | None = None,
                  struc: np.ndarray | None = None,
                  stat_series: np.ndarray | None = None) -> SelectionResult:
    """Execute a selection request; all indices in the result are absolute.

    Precomputed codes / matrices may be supplied by a caching layer; absent
    pieces are derived on the fly.
    """
    params.range.validate(dataset.t)
    if struc is None:
        if codes is None:
            codes = dataset_codes(dataset, params.region)
        struc = structural_matrix_for_range(codes, params.range)
    if stat_series is None:
        stat_series = normalized_series_for_range(dataset, params)

    n = params.range.length
    combined = selector.combined_cost_matrix(params, struc, stat_series)
    components = {
        "structural": struc,
        "statistical": np.asarray(
            selector.statistical_cost_matrix(stat_series), dtype=np.float64
        ),
        "distance": selector.distance_cost_matrix(n, params.k, params.gamma, params.sigma),
    }
    offset = params.range.start
    rel_pinned = [p - offset for p in params.pinned]
    rel_excluded = [e - offset for e in params.excluded]
    result = selector.select_salient(n, params.k, combined, rel_pinned, rel_excluded,
                                     components=components)
    abs_steps = tuple(s + offset for s in result.steps)
    abs_pairs = tuple(replace(pc, i=pc.i + offset, j=pc.j + offset)
                      for pc in result.pair_costs)
    return SelectionResult(steps=abs_steps, total_cost=result.total_cost,
                           pair_costs=abs_pairs, params_echo=params)


def preload_order(steps: tuple[int, ...], range_: FocusRange,
                  neighbor_depth: int = 2) -> list[int]:
    """Salient-first download schedule: picks, then ring-1, then ring-2."""
    order = list(steps)
    seen = set(order)
    for depth in range(1, neighbor_depth + 1):
        for s in steps:
            for candidate in (s - depth, s + depth):
                if range_.start <= candidate <= range_.end and candidate not in seen:
                    order.append(candidate)
                    seen.add(candidate)
    return order


def trend_series(dataset: Dataset, kind: str, range_: FocusRange,
                 region: Region | None = None, ref: int | None = None,
                 codes: list[features.LatentCode] | None = None) -> list[float]:
    """Per-step context series for the timeline charts.

    structural without ref: cost between consecutive codes (step 0 pairs
    with itself). structural with ref: cost of every frame against frame
    ``ref``. Statistical kinds: the normalized aggregate series, or its
    absolute gap against ``ref`` when given.
    """
    range_.validate(dataset.t)
    if ref is not None and not range_.start <= ref <= range_.end:
        raise BoundsError(f"ref {ref} outside range {range_.start}:{range_.end}")
    if kind == STRUCTURAL_TREND:
        if codes is None:
            codes = dataset_codes(dataset, region)
        window = codes[range_.start : range_.end + 1]
        sim = features.similarity_matrix(window)
        cost = np.asarray(features.similarity_to_cost(sim))
        if ref is None:
            values = [float(cost[max(i - 1, 0), i]) for i in range(len(window))]
        else:
            r = ref - range_.start
            values = [float(cost[i, r]) for i in range(len(window))]
        return values
    agg_kind = AggregationKind.parse(kind)
    values = aggregate_values(dataset, range_, region, agg_kind)
    normalized = normalize_series(values)
    if ref is None:
        return [float(v) for v in normalized]
    r = ref - range_.start
    return [float(abs(v - normalized[r])) for v in normalized]
