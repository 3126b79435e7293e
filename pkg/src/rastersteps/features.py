"""Per-frame structural feature codes and the pairwise structural cost.

The default code source is a deterministic multi-scale descriptor: the frame
is area-mean resampled to a square working size, mean-pooled into a pyramid,
and every pyramid level is summarized on a fixed cell grid. Externally
trained codes can be imported from a simple binary file instead; both routes
feed the same cosine-similarity based cost.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundsError, FormatError, InvalidCodeError
from .grids import GridFrame

# Sigmoid that maps a cosine similarity onto (0, 1). Gain and center chosen
# so the typical similarity band [0.5, 1.0] is spread across most of the
# output range; similar frames cost more, dissimilar frames cost less.
_SIGMOID_GAIN = 5.0
_SIGMOID_CENTER = 0.5


@dataclass(frozen=True)
class DescriptorConfig:
    """Shape of the multi-scale descriptor."""

    base_size: int = 256
    levels: int = 8
    cells: int = 8  # cell grid is cells x cells per level

    def __post_init__(self):
        if self.levels < 1 or self.base_size < 2 or self.cells < 1:
            raise BoundsError("descriptor needs levels >= 1, base_size >= 2, cells >= 1")
        if self.base_size % (1 << (self.levels - 1)) != 0:
            raise BoundsError(
                f"base_size {self.base_size} not divisible by 2^{self.levels - 1}"
            )

    @property
    def dims(self) -> int:
        return self.levels * self.cells * self.cells


DEFAULT_CONFIG = DescriptorConfig()


class LatentCode:
    """Feature vector describing one frame (or one frame region)."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=np.float64).reshape(-1)

    @property
    def dims(self) -> int:
        return self.values.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def _overlap_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) row-stochastic matrix of interval-overlap fractions.

    Output cell j covers [j*n_in/n_out, (j+1)*n_in/n_out) on the input axis;
    weights are overlap lengths normalized to sum to 1, so constants are
    preserved exactly and the map is linear.
    """
    scale = n_in / n_out
    weights = np.zeros((n_out, n_in), dtype=np.float64)
    for j in range(n_out):
        lo = j * scale
        hi = (j + 1) * scale
        i0 = int(np.floor(lo))
        i1 = min(int(np.ceil(hi)), n_in)
        for i in range(i0, i1):
            weights[j, i] = min(hi, i + 1) - max(lo, i)
        weights[j] /= scale
    return weights


def area_mean_resize(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Area-weighted mean resampling of a 2D field to (out_h, out_w)."""
    h, w = data.shape
    return _overlap_weights(h, out_h) @ data @ _overlap_weights(w, out_w).T


def _pool2(data: np.ndarray) -> np.ndarray:
    """2x mean pooling of a square array with even side."""
    n = data.shape[0] // 2
    return data.reshape(n, 2, n, 2).mean(axis=(1, 3))


def _to_cell_grid(level: np.ndarray, cells: int) -> np.ndarray:
    """Summarize a square level on a cells x cells grid.

    Levels at least as large as the grid are mean-pooled; smaller levels
    replicate their values so coarse scales carry no fabricated detail.
    """
    side = level.shape[0]
    if side >= cells:
        if side % cells == 0:
            block = side // cells
            return level.reshape(cells, block, cells, block).mean(axis=(1, 3))
        return area_mean_resize(level, cells, cells)
    rep = cells // side
    if side * rep != cells:
        return area_mean_resize(level, cells, cells)
    return np.repeat(np.repeat(level, rep, axis=0), rep, axis=1)


def pyramid_descriptor(frame: GridFrame, cfg: DescriptorConfig = DEFAULT_CONFIG) -> LatentCode:
    """Deterministic multi-scale code of a normalized, NaN-filled frame.

    The frame is resampled to base_size^2, halved ``levels`` times into a
    mean pyramid, and each level is laid out on the cell grid; levels are
    concatenated finest to coarsest.
    """
    if frame.width < 1 or frame.height < 1:
        raise BoundsError("cannot describe a zero-area frame")
    working = area_mean_resize(frame.data, cfg.base_size, cfg.base_size)
    parts = []
    level = working
    for _ in range(cfg.levels):
        level = _pool2(level)
        parts.append(_to_cell_grid(level, cfg.cells).reshape(-1))
    return LatentCode(np.concatenate(parts))


def codes_for_cube(cube: np.ndarray, cfg: DescriptorConfig = DEFAULT_CONFIG) -> list[LatentCode]:
    """Descriptor codes for every frame of a (t, h, w) stack."""
    return [pyramid_descriptor(GridFrame(cube[i]), cfg) for i in range(cube.shape[0])]


# ---------------------------------------------------------------------------
# Latent-code file format: u32le count, u32le dim, then count*dim f32le.


def write_latent_codes(codes: list[LatentCode], path: str | Path) -> Path:
    if not codes:
        raise FormatError("cannot write an empty code list")
    dim = codes[0].dims
    for c in codes:
        if c.dims != dim:
            raise FormatError(f"mixed code dims {dim} vs {c.dims}")
    out = Path(path)
    stacked = np.stack([c.values for c in codes]).astype("<f4")
    with out.open("wb") as fh:
        fh.write(struct.pack("<II", len(codes), dim))
        fh.write(stacked.tobytes())
    return out


def load_latent_codes(path: str | Path) -> list[LatentCode]:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise FormatError("code file shorter than its header")
    count, dim = struct.unpack_from("<II", raw)
    expected = 8 + 4 * count * dim
    if len(raw) != expected:
        raise FormatError(
            f"code file holds {len(raw) - 8} payload bytes, expected {4 * count * dim}"
        )
    flat = np.frombuffer(raw, dtype="<f4", offset=8).astype(np.float64)
    rows = flat.reshape(count, dim)
    codes = []
    for i, row in enumerate(rows):
        if not np.any(row):
            raise InvalidCodeError(f"code row {i} has zero norm")
        codes.append(LatentCode(row))
    return codes


# ---------------------------------------------------------------------------
# Structural cost


def cosine_similarity(a: LatentCode, b: LatentCode) -> float:
    """Cosine of the angle between two codes, clipped into [-1, 1]."""
    if a.dims != b.dims:
        raise InvalidCodeError(f"code dims differ: {a.dims} vs {b.dims}")
    na, nb = a.norm, b.norm
    if na == 0.0 or nb == 0.0:
        raise InvalidCodeError("cosine similarity undefined for zero-norm codes")
    return float(np.clip(np.dot(a.values, b.values) / (na * nb), -1.0, 1.0))


def similarity_to_cost(s) -> np.ndarray | float:
    """Map similarity (scalar or array) onto the (0, 1) cost scale."""
    return 1.0 / (1.0 + np.exp(-_SIGMOID_GAIN * (np.asarray(s, dtype=np.float64) - _SIGMOID_CENTER)))


def structural_cost(a: LatentCode, b: LatentCode) -> float:
    return float(similarity_to_cost(cosine_similarity(a, b)))


def similarity_matrix(codes: list[LatentCode]) -> np.ndarray:
    """Pairwise cosine similarities with a fixed zero-norm convention.

    Descriptor codes of an all-zero frame (every value at the dataset
    minimum) have zero norm; such a frame is treated as identical to another
    all-zero frame (S = 1) and maximally dissimilar to anything else (S = 0)
    so downstream costs stay defined.
    """
    if not codes:
        raise BoundsError("need at least one code")
    dim = codes[0].dims
    for c in codes:
        if c.dims != dim:
            raise InvalidCodeError("codes of one context must share dims")
    stacked = np.stack([c.values for c in codes])
    norms = np.linalg.norm(stacked, axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    unit = stacked / safe[:, None]
    sim = unit @ unit.T
    sim = np.clip((sim + sim.T) / 2.0, -1.0, 1.0)  # enforce exact symmetry
    if np.any(zero):
        both = np.outer(zero, zero)
        either = np.logical_or.outer(zero, zero)
        sim[either] = 0.0
        sim[both] = 1.0
    np.fill_diagonal(sim, 1.0)
    return sim


def structural_cost_matrix(codes: list[LatentCode]) -> np.ndarray:
    """T x T symmetric matrix of structural costs."""
    return np.asarray(similarity_to_cost(similarity_matrix(codes)))
