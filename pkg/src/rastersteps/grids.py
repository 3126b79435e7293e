"""Raster time-series storage: ingest, crop, normalize and synthesize.

A dataset is an ordered stack of equally-sized 2D scalar fields with
timestamps and a geographic extent. Values are float64 in memory and
little-endian float32 on disk; NaN marks missing cells throughout.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BoundsError, EmptyDataError, FormatError

FRAME_FILE_PATTERN = "frame_%06d"


@dataclass(frozen=True)
class NormStats:
    """NaN-aware global value range of a dataset."""

    vmin: float
    vmax: float

    def __post_init__(self):
        if not (math.isfinite(self.vmin) and math.isfinite(self.vmax)):
            raise EmptyDataError("normalization stats require finite extrema")
        if self.vmin > self.vmax:
            raise FormatError(f"vmin {self.vmin} > vmax {self.vmax}")


@dataclass(frozen=True)
class Region:
    """Inclusive pixel-index rectangle."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (0 <= self.x0 <= self.x1 and 0 <= self.y0 <= self.y1):
            raise BoundsError(
                f"region corners out of order: ({self.x0},{self.y0},{self.x1},{self.y1})"
            )

    def validate(self, width: int, height: int) -> None:
        if not (0 <= self.x0 <= self.x1 < width and 0 <= self.y0 <= self.y1 < height):
            raise BoundsError(
                f"region ({self.x0},{self.y0},{self.x1},{self.y1}) outside {width}x{height} grid"
            )

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1

    def slices(self) -> tuple[slice, slice]:
        """(row, column) slices for numpy indexing."""
        return slice(self.y0, self.y1 + 1), slice(self.x0, self.x1 + 1)


@dataclass(frozen=True)
class FocusRange:
    """Inclusive frame-index interval the user is working in."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise BoundsError(f"focus range needs 0 <= start < end, got {self.start}:{self.end}")

    def validate(self, t: int) -> None:
        if not (0 <= self.start < self.end < t):
            raise BoundsError(f"focus range {self.start}:{self.end} invalid for {t} frames")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


class GridFrame:
    """One time step: a height x width float64 field, NaN allowed."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise BoundsError(f"frame must be a non-empty 2D field, got shape {arr.shape}")
        self.data = arr

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view of the field."""
        return self.data.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridFrame):
            return NotImplemented
        return self.data.shape == other.data.shape and np.array_equal(
            self.data, other.data, equal_nan=True
        )


@dataclass
class Dataset:
    """Ordered frame stack with timestamps, spatial metadata and value range."""

    id: str
    variable: str
    cube: np.ndarray  # (t, height, width) float64
    timestamps: list[str]
    extent: tuple[float, float, float, float]  # lon0, lat0, lon1, lat1
    norm: NormStats = field(init=False)

    def __post_init__(self):
        self.cube = np.asarray(self.cube, dtype=np.float64)
        if self.cube.ndim != 3:
            raise FormatError(f"frame stack must be 3D, got shape {self.cube.shape}")
        if len(self.timestamps) != self.cube.shape[0]:
            raise FormatError(
                f"{len(self.timestamps)} timestamps for {self.cube.shape[0]} frames"
            )
        _check_strictly_increasing(self.timestamps)
        if np.all(np.isnan(self.cube)):
            raise EmptyDataError(f"dataset {self.id!r} contains no finite values")
        self.norm = NormStats(
            float(np.nanmin(self.cube)), float(np.nanmax(self.cube))
        )

    @property
    def t(self) -> int:
        return self.cube.shape[0]

    @property
    def height(self) -> int:
        return self.cube.shape[1]

    @property
    def width(self) -> int:
        return self.cube.shape[2]

    def frame(self, i: int) -> GridFrame:
        if not 0 <= i < self.t:
            raise BoundsError(f"frame index {i} outside 0..{self.t - 1}")
        return GridFrame(self.cube[i])

    @property
    def frames(self) -> list[GridFrame]:
        return [GridFrame(self.cube[i]) for i in range(self.t)]

    def region_cube(self, region: Region | None) -> np.ndarray:
        """(t, rh, rw) view of the cube restricted to ``region``."""
        if region is None:
            return self.cube
        region.validate(self.width, self.height)
        rows, cols = region.slices()
        return self.cube[:, rows, cols]


def _check_strictly_increasing(timestamps: Sequence[str]) -> None:
    parsed = []
    for ts in timestamps:
        try:
            parsed.append(datetime.fromisoformat(ts.replace("Z", "+00:00")))
        except ValueError as exc:
            raise FormatError(f"bad ISO-8601 timestamp {ts!r}") from exc
    for a, b in zip(parsed, parsed[1:]):
        if a >= b:
            raise FormatError(f"timestamps not strictly increasing at {a.isoformat()}")


def crop(frame: GridFrame, region: Region) -> GridFrame:
    """Copy the inclusive sub-rectangle of ``frame``."""
    region.validate(frame.width, frame.height)
    rows, cols = region.slices()
    return GridFrame(frame.data[rows, cols].copy())


def normalize(frame: GridFrame, norm: NormStats) -> GridFrame:
    """Map non-NaN values to [0, 1]; a degenerate range maps everything to 0."""
    span = norm.vmax - norm.vmin
    if span == 0:
        out = np.where(np.isnan(frame.data), np.nan, 0.0)
    else:
        out = (frame.data - norm.vmin) / span
    return GridFrame(out)


def denormalize(frame: GridFrame, norm: NormStats) -> GridFrame:
    return GridFrame(frame.data * (norm.vmax - norm.vmin) + norm.vmin)


def fill_nan(frame: GridFrame, fill: float = 0.0) -> GridFrame:
    out = frame.data.copy()
    out[np.isnan(out)] = fill
    return GridFrame(out)


def normalize_cube(cube: np.ndarray, norm: NormStats) -> np.ndarray:
    """Vectorized :func:`normalize` over a (t, h, w) stack."""
    span = norm.vmax - norm.vmin
    if span == 0:
        return np.where(np.isnan(cube), np.nan, 0.0)
    return (cube - norm.vmin) / span


# ---------------------------------------------------------------------------
# Frame-stack container format


def ingest_stack(path: str | Path) -> Dataset:
    """Load a frame-stack directory (meta.json + frame_%06d.f32 or .csv)."""
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise FormatError(f"missing meta.json in {root}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"meta.json is not valid JSON: {exc}") from exc

    for key in ("id", "variable", "width", "height", "count", "timestamps", "extent"):
        if key not in meta:
            raise FormatError(f"meta.json missing field {key!r}")
    width, height, count = int(meta["width"]), int(meta["height"]), int(meta["count"])
    if width < 1 or height < 1 or count < 1:
        raise FormatError("width, height and count must be positive")
    if len(meta["timestamps"]) != count:
        raise FormatError(
            f"meta declares {count} frames but {len(meta['timestamps'])} timestamps"
        )
    extent = tuple(float(v) for v in meta["extent"])
    if len(extent) != 4:
        raise FormatError("extent must be [lon0, lat0, lon1, lat1]")

    frames = np.empty((count, height, width), dtype=np.float64)
    for i in range(count):
        stem = root / (FRAME_FILE_PATTERN % i)
        f32 = stem.with_suffix(".f32")
        csv = stem.with_suffix(".csv")
        if f32.is_file():
            frames[i] = _read_f32_frame(f32, width, height)
        elif csv.is_file():
            frames[i] = _read_csv_frame(csv, width, height)
        else:
            raise FormatError(f"missing frame file for step {i} in {root}")

    return Dataset(
        id=str(meta["id"]),
        variable=str(meta["variable"]),
        cube=frames,
        timestamps=[str(ts) for ts in meta["timestamps"]],
        extent=extent,  # type: ignore[arg-type]
    )


def _read_f32_frame(path: Path, width: int, height: int) -> np.ndarray:
    raw = path.read_bytes()
    expected = 4 * width * height
    if len(raw) != expected:
        raise FormatError(f"{path.name}: {len(raw)} bytes, expected {expected}")
    return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(height, width)


def _read_csv_frame(path: Path, width: int, height: int) -> np.ndarray:
    rows = []
    for line in path.read_text().strip().splitlines():
        cells = [c.strip() for c in line.split(",")]
        rows.append([float("nan") if c.lower() in ("", "nan") else float(c) for c in cells])
    arr = np.asarray(rows, dtype=np.float64)
    if arr.shape != (height, width):
        raise FormatError(f"{path.name}: grid {arr.shape}, expected {(height, width)}")
    return arr


def export_stack(dataset: Dataset, path: str | Path) -> Path:
    """Write ``dataset`` as a frame-stack directory (32-bit frames)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "id": dataset.id,
        "variable": dataset.variable,
        "width": dataset.width,
        "height": dataset.height,
        "count": dataset.t,
        "timestamps": dataset.timestamps,
        "extent": list(dataset.extent),
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    for i in range(dataset.t):
        frame32 = dataset.cube[i].astype("<f4")
        (root / ((FRAME_FILE_PATTERN % i) + ".f32")).write_bytes(frame32.tobytes())
    return root


# ---------------------------------------------------------------------------
# Synthetic generators


@dataclass(frozen=True)
class SyntheticSpec:
    """Deterministic synthetic dataset description.

    Families:
      ramp     -- frame i is the constant i/(t-1); exactly linear in time.
      burst    -- stationary base field with a distinct spike frame at each
                  declared index; ``drift`` > 0 additionally moves the base
                  field along an accelerating path and softens the spikes
                  (a non-stationary variant for reconstruction studies).
      blob     -- Gaussian blob translating linearly across the grid.
      seasonal -- sinusoidal cycle modulating a fixed pattern plus seeded noise.
    """

    family: str
    t: int
    width: int = 8
    height: int = 8
    seed: int = 0
    bursts: tuple[int, ...] = ()
    drift: float = 0.0
    period: float | None = None

    def __post_init__(self):
        if self.family not in ("ramp", "burst", "blob", "seasonal"):
            raise FormatError(f"unknown synthetic family {self.family!r}")
        if self.t < 1 or self.width < 1 or self.height < 1:
            raise BoundsError("synthetic dataset needs t, width, height >= 1")
        for b in self.bursts:
            if not 0 <= b < self.t:
                raise BoundsError(f"burst index {b} outside 0..{self.t - 1}")


def synthesize(spec: SyntheticSpec) -> Dataset:
    """Generate a deterministic dataset for the given spec and seed."""
    t, h, w = spec.t, spec.height, spec.width
    yy, xx = np.mgrid[0:h, 0:w]
    # cell-center coordinates in the unit square
    x = (xx + 0.5) / w
    y = (yy + 0.5) / h

    def blob(cx, cy, sigma, amp):
        return amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sigma**2))

    cube = np.empty((t, h, w), dtype=np.float64)
    if spec.family == "ramp":
        for i in range(t):
            cube[i] = i / (t - 1) if t > 1 else 0.0
    elif spec.family == "burst":
        burst_set = set(spec.bursts)
        if spec.drift <= 0:
            base = 0.1 + blob(0.35, 0.5, 0.18, 1.0)
            spike = 0.1 + blob(0.75, 0.3, 0.12, 1.5)
            for i in range(t):
                cube[i] = spike if i in burst_set else base
        else:
            # Non-stationary variant: two blobs drift with end-loaded speed,
            # the narrow one running out and back, and each burst frame adds
            # a localized excursion scaled by ``drift``. Constants fixed so
            # uneven feature motion dominates the reconstruction error.
            def smoothstep(v):
                return 3 * v * v - 2 * v * v * v

            turn = 0.65
            for i in range(t):
                u = i / (t - 1) if t > 1 else 0.0
                s = u**1.6
                if s <= turn:
                    cx = 0.2 + 0.6 * smoothstep(s / turn)
                else:
                    cx = 0.8 - 0.5 * smoothstep((s - turn) / (1 - turn))
                cube[i] = (
                    0.05
                    + blob(cx, 0.35, 0.06, 1.0)
                    + blob(0.5, 0.25 + 0.5 * s, 0.22, 0.4)
                )
                if i in burst_set:
                    cube[i] += spec.drift * blob(0.85, 0.85, 0.1, 1.0)
    elif spec.family == "blob":
        for i in range(t):
            u = i / (t - 1) if t > 1 else 0.0
            cube[i] = blob(0.2 + 0.6 * u, 0.5, 0.15, 1.0)
    else:  # seasonal
        rng = np.random.default_rng(spec.seed)
        period = spec.period if spec.period else max(4.0, t / 4.0)
        pattern = 0.5 + 0.5 * x  # west-east gradient of seasonal amplitude
        for i in range(t):
            phase = math.sin(2 * math.pi * i / period)
            cube[i] = 0.5 + 0.35 * phase * pattern
        cube += rng.normal(0.0, 0.02, size=cube.shape)

    start = datetime(2020, 1, 1, tzinfo=timezone.utc)
    timestamps = [(start + timedelta(hours=i)).isoformat() for i in range(t)]
    name = f"synth-{spec.family}-t{t}-{w}x{h}-s{spec.seed}"
    return Dataset(
        id=name,
        variable=spec.family,
        cube=cube,
        timestamps=timestamps,
        extent=(100.0, 10.0, 110.0, 20.0),
    )


_REGION_RE = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*$")


def parse_region(text: str) -> Region:
    """Parse the user-facing ``x0,y0,x1,y1`` form."""
    m = _REGION_RE.match(text)
    if not m:
        raise FormatError(f"region must be 'x0,y0,x1,y1', got {text!r}")
    return Region(*(int(g) for g in m.groups()))


def parse_range(text: str) -> FocusRange:
    """Parse the user-facing inclusive ``a:b`` form."""
    parts = text.split(":")
    if len(parts) != 2:
        raise FormatError(f"range must be 'a:b', got {text!r}")
    try:
        return FocusRange(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise FormatError(f"range must be integer 'a:b', got {text!r}") from exc
