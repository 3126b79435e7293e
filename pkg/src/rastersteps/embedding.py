"""2D projection of latent codes for the trajectory view, plus display sampling."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundsError
from .features import LatentCode

DISPLAY_CAP = 500


@dataclass(frozen=True)
class EmbeddedPoint:
    index: int
    x: float
    y: float
    salient: bool = False
    sampled_out: bool = False


def project_2d(codes: Sequence[LatentCode]) -> list[EmbeddedPoint]:
    """Project codes onto their two main variance axes, scaled into [-1, 1]^2.

    Axes are oriented so each one's largest-magnitude loading is positive,
    making the output deterministic; both axes share one scale factor so
    relative distances survive. Zero-variance input collapses to the origin.
    """
    if len(codes) < 3:
        raise BoundsError(f"projection needs at least 3 codes, got {len(codes)}")
    stacked = np.stack([c.values for c in codes])
    centered = stacked - stacked.mean(axis=0)
    # SVD of the centered data gives the variance axes without forming a
    # dims x dims covariance matrix
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt[:2]
    if axes.shape[0] < 2:
        axes = np.vstack([axes, np.zeros_like(axes[0])])
    for row in range(2):
        loading = axes[row]
        lead = np.argmax(np.abs(loading))
        if loading[lead] < 0:
            axes[row] = -loading
    scores = centered @ axes.T
    span = np.abs(scores).max()
    if span > 0:
        scores = scores / span
    return [
        EmbeddedPoint(index=i, x=float(scores[i, 0]), y=float(scores[i, 1]))
        for i in range(len(codes))
    ]


def sample_for_display(points: Sequence[EmbeddedPoint], salient: Iterable[int] = (),
                       cap: int = DISPLAY_CAP) -> list[EmbeddedPoint]:
    """Flag points beyond the display cap as sampled out.

    Retains an evenly strided subset of at most ``cap`` points; salient
    points are always retained regardless of stride.
    """
    salient_set = set(salient)
    marked = [replace(p, salient=p.index in salient_set) for p in points]
    if len(marked) <= cap:
        return marked
    stride = -(-len(marked) // cap)  # ceil division
    out = []
    for pos, p in enumerate(marked):
        keep = pos % stride == 0 or p.salient
        out.append(replace(p, sampled_out=not keep))
    return out
