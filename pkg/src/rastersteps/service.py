"""HTTP facade: dataset registry, frame delivery, selection, trends, embeddings.

All endpoints live under ``/api/v1``. Responses are pure functions of the
request and the immutable dataset registry, so derived artifacts (codes,
cost matrices, aggregate series, embeddings, selection results) are cached
in a single-flight LRU keyed by dataset/region/range. 4xx errors share one
schema: ``{"code": ..., "message": ..., "field": ...?}``.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import pipeline
from .aggregation import AggregationKind
from .cache import CacheKey, DerivedCache
from .colormap import render_rgba
from .embedding import project_2d, sample_for_display
from .errors import BoundsError, RasterStepsError
from .grids import Dataset, FocusRange, Region, ingest_stack, parse_range, parse_region
from .selector import SelectionParams, SelectionResult

API_PREFIX = "/api/v1"


@dataclass(frozen=True)
class FrameStatus:
    """Initial load-state marks for one frame of the focus range."""

    index: int
    state: Literal["salient", "unloaded"]
    pinned: bool = False
    excluded: bool = False


class RegionBody(BaseModel):
    x0: int
    y0: int
    x1: int
    y1: int


class RangeBody(BaseModel):
    start: int
    end: int


class SelectBody(BaseModel):
    range: RangeBody
    k: int
    alpha: float = 1.0
    beta: float = 0.0
    aggregation: str = "avg"
    region: RegionBody | None = None
    pinned: list[int] = Field(default_factory=list)
    excluded: list[int] = Field(default_factory=list)
    gamma: float = 0.3
    sigma: float = 1.0

    def canonical(self) -> str:
        payload = self.model_dump() if hasattr(self, "model_dump") else self.dict()
        payload["pinned"] = sorted(set(payload["pinned"]))
        payload["excluded"] = sorted(set(payload["excluded"]))
        return json.dumps(payload, sort_keys=True)


class ServiceState:
    """Registry of immutable datasets plus the derived-artifact cache."""

    def __init__(self, cache_bytes: int = 256 * 1024 * 1024):
        self.datasets: dict[str, Dataset] = {}
        self.cache = DerivedCache(cache_bytes)

    def register(self, dataset: Dataset, precompute: bool = True) -> None:
        self.datasets[dataset.id] = dataset
        if precompute:
            # pay the code/aggregation cost at registration so selection
            # requests only run the optimizer
            self.codes(dataset, None)
            for kind in AggregationKind:
                key = CacheKey(dataset.id, f"agg-values-{kind.value}", None, None)
                self.cache.get_or_build(
                    key,
                    lambda d=dataset, k=kind: _full_series(d, None, k),
                )

    def get(self, dataset_id: str) -> Dataset:
        ds = self.datasets.get(dataset_id)
        if ds is None:
            raise KeyError(dataset_id)
        return ds

    def codes(self, dataset: Dataset, region: Region | None):
        key = CacheKey(dataset.id, "codes", region, None)
        return self.cache.get_or_build(
            key, lambda: pipeline.dataset_codes(dataset, region)
        )

    def structural_matrix(self, dataset: Dataset, region: Region | None,
                          range_: FocusRange) -> np.ndarray:
        key = CacheKey(dataset.id, "struc-matrix", region, range_)
        codes = self.codes(dataset, region)
        return self.cache.get_or_build(
            key, lambda: pipeline.structural_matrix_for_range(codes, range_)
        )

    def agg_series(self, dataset: Dataset, region: Region | None,
                   kind: AggregationKind) -> np.ndarray:
        key = CacheKey(dataset.id, f"agg-values-{kind.value}", region, None)
        return self.cache.get_or_build(
            key, lambda: _full_series(dataset, region, kind)
        )


def _full_series(dataset: Dataset, region: Region | None, kind: AggregationKind) -> np.ndarray:
    from .aggregation import aggregate_cube

    return aggregate_cube(dataset.region_cube(region), kind)


def _error_response(status: int, code: str, message: str, field: str | None = None) -> JSONResponse:
    body: dict = {"code": code, "message": message}
    if field is not None:
        body["field"] = field
    return JSONResponse(status_code=status, content=body)


def _sanitize(obj):
    """Make a structure JSON-strict: NaN/inf floats become null/'inf'."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _selection_payload(result: SelectionResult, range_: FocusRange) -> dict:
    params = result.params_echo
    assert params is not None
    preload = pipeline.preload_order(result.steps, range_)
    salient = set(result.steps)
    status = [
        FrameStatus(
            index=i,
            state="salient" if i in salient else "unloaded",
            pinned=i in params.pinned,
            excluded=i in params.excluded,
        )
        for i in range(range_.start, range_.end + 1)
    ]
    return {
        "steps": list(result.steps),
        "total_cost": result.total_cost,
        "pair_costs": [
            {
                "i": pc.i,
                "j": pc.j,
                "structural": pc.structural,
                "statistical": pc.statistical,
                "distance": pc.distance,
                "combined": pc.combined,
            }
            for pc in result.pair_costs
        ],
        "params": {
            "range": {"start": params.range.start, "end": params.range.end},
            "k": params.k,
            "alpha": params.alpha,
            "beta": params.beta,
            "gamma": params.gamma,
            "sigma": params.sigma,
            "aggregation": params.aggregation.value,
            "region": None
            if params.region is None
            else {
                "x0": params.region.x0,
                "y0": params.region.y0,
                "x1": params.region.x1,
                "y1": params.region.y1,
            },
            "pinned": sorted(params.pinned),
            "excluded": sorted(params.excluded),
        },
        "preload_order": preload,
        "frame_status": [
            {
                "index": fs.index,
                "state": fs.state,
                "pinned": fs.pinned,
                "excluded": fs.excluded,
            }
            for fs in status
        ],
    }


def create_app(datasets: list[Dataset] | None = None,
               data_root: str | Path | None = None,
               cache_bytes: int = 256 * 1024 * 1024,
               precompute: bool = True) -> FastAPI:
    """Build the API app; datasets may come in-memory or from a stack root."""
    state = ServiceState(cache_bytes)
    app = FastAPI(title="rastersteps", version="0.1.0")
    app.state.registry = state

    for ds in datasets or []:
        state.register(ds, precompute=precompute)
    if data_root is not None:
        for meta in sorted(Path(data_root).glob("*/meta.json")):
            state.register(ingest_stack(meta.parent), precompute=precompute)

    @app.exception_handler(RasterStepsError)
    def _domain_error(_req: Request, exc: RasterStepsError):
        return _error_response(400, exc.code, str(exc))

    @app.exception_handler(KeyError)
    def _missing(_req: Request, exc: KeyError):
        return _error_response(404, "not-found", f"unknown dataset {exc.args[0]!r}")

    @app.exception_handler(RequestValidationError)
    def _invalid(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(p) for p in first.get("loc", []) if p != "body") or None
        return _error_response(400, "validation", first.get("msg", "invalid request"), field)

    @app.get(API_PREFIX + "/datasets")
    def list_datasets():
        out = []
        for ds in state.datasets.values():
            out.append({
                "id": ds.id,
                "variable": ds.variable,
                "width": ds.width,
                "height": ds.height,
                "t": ds.t,
                "extent": list(ds.extent),
                "timespan": [ds.timestamps[0], ds.timestamps[-1]],
            })
        return out

    @app.get(API_PREFIX + "/datasets/{dataset_id}/frames/{t}")
    def get_frame(dataset_id: str, t: int, region: str | None = None,
                  format: str = "f32", cmap: str = "viridis",
                  vmin: float | None = None, vmax: float | None = None):
        ds = state.get(dataset_id)
        if not 0 <= t < ds.t:
            return _error_response(404, "not-found", f"frame {t} outside 0..{ds.t - 1}")
        data = ds.cube[t]
        if region is not None:
            reg = parse_region(region)
            reg.validate(ds.width, ds.height)
            rows, cols = reg.slices()
            data = data[rows, cols]
        finite = data[~np.isnan(data)]
        headers = {
            "X-Frame-Min": repr(float(finite.min())) if finite.size else "nan",
            "X-Frame-Max": repr(float(finite.max())) if finite.size else "nan",
            "X-Frame-Avg": repr(float(finite.mean())) if finite.size else "nan",
        }
        if format == "f32":
            payload = data.astype("<f4").tobytes()
            return Response(payload, media_type="application/octet-stream", headers=headers)
        if format == "png":
            from PIL import Image

            lo = ds.norm.vmin if vmin is None else vmin
            hi = ds.norm.vmax if vmax is None else vmax
            span = hi - lo
            rgba = render_rgba(
                (data - lo) / span if span > 0 else np.zeros_like(data),
                0.0, 1.0, cmap,
            )
            buf = io.BytesIO()
            Image.fromarray(rgba, mode="RGBA").save(buf, format="PNG")
            return Response(buf.getvalue(), media_type="image/png", headers=headers)
        raise BoundsError(f"format must be f32 or png, got {format!r}")

    @app.post(API_PREFIX + "/datasets/{dataset_id}/select")
    def select(dataset_id: str, body: SelectBody):
        ds = state.get(dataset_id)
        started = time.perf_counter()
        region = None
        if body.region is not None:
            region = Region(body.region.x0, body.region.y0, body.region.x1, body.region.y1)
        params = SelectionParams(
            range=FocusRange(body.range.start, body.range.end),
            k=body.k,
            alpha=body.alpha,
            beta=body.beta,
            gamma=body.gamma,
            sigma=body.sigma,
            aggregation=AggregationKind.parse(body.aggregation),
            region=region,
            pinned=frozenset(body.pinned),
            excluded=frozenset(body.excluded),
        )
        params.range.validate(ds.t)

        digest = hashlib.sha256(body.canonical().encode()).hexdigest()[:32]
        key = CacheKey(ds.id, "selection", region, params.range, extra=digest)
        cached_before = state.cache.peek(key) is not None

        def build():
            struc = state.structural_matrix(ds, region, params.range)
            series_full = state.agg_series(ds, region, params.aggregation)
            from .aggregation import normalize_series

            window = series_full[params.range.start : params.range.end + 1]
            stat_series = normalize_series(window)
            result = pipeline.run_selection(ds, params, struc=struc, stat_series=stat_series)
            return _selection_payload(result, params.range)

        payload = state.cache.get_or_build(key, build)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        headers = {
            "X-Cache": "hit" if cached_before else "miss",
            "X-Duration-Ms": f"{elapsed_ms:.2f}",
        }
        return JSONResponse(content=_sanitize(payload), headers=headers)

    @app.get(API_PREFIX + "/datasets/{dataset_id}/trend")
    def trend(dataset_id: str, kind: str = "structural", range: str | None = None,
              region: str | None = None, ref: int | None = None):
        ds = state.get(dataset_id)
        range_ = parse_range(range) if range else FocusRange(0, ds.t - 1)
        range_.validate(ds.t)
        reg = parse_region(region) if region else None
        if reg is not None:
            reg.validate(ds.width, ds.height)
        codes = state.codes(ds, reg) if kind == "structural" else None
        values = pipeline.trend_series(ds, kind, range_, reg, ref, codes=codes)
        return JSONResponse(content=_sanitize({
            "kind": kind,
            "range": {"start": range_.start, "end": range_.end},
            "ref": ref,
            "values": values,
        }))

    @app.get(API_PREFIX + "/datasets/{dataset_id}/embedding")
    def embedding(dataset_id: str, range: str | None = None, region: str | None = None,
                  salient: str | None = None):
        ds = state.get(dataset_id)
        range_ = parse_range(range) if range else FocusRange(0, ds.t - 1)
        range_.validate(ds.t)
        reg = parse_region(region) if region else None
        if reg is not None:
            reg.validate(ds.width, ds.height)
        salient_set = set()
        if salient:
            try:
                salient_set = {int(s) for s in salient.split(",") if s.strip()}
            except ValueError:
                raise BoundsError(f"salient must be a comma list of ints, got {salient!r}")

        key = CacheKey(ds.id, "embedding", reg, range_)

        def build():
            codes = state.codes(ds, reg)
            window = codes[range_.start : range_.end + 1]
            pts = project_2d(window)
            return [
                {"index": p.index + range_.start, "x": p.x, "y": p.y}
                for p in pts
            ]

        raw_points = state.cache.get_or_build(key, build)
        from .embedding import EmbeddedPoint

        pts = [
            EmbeddedPoint(index=p["index"], x=p["x"], y=p["y"]) for p in raw_points
        ]
        sampled = sample_for_display(pts, salient_set)
        return JSONResponse(content=_sanitize({
            "method": "pca",
            "range": {"start": range_.start, "end": range_.end},
            "points": [
                {
                    "index": p.index,
                    "x": p.x,
                    "y": p.y,
                    "salient": p.salient,
                    "sampled_out": p.sampled_out,
                }
                for p in sampled
            ],
        }))

    return app
