"""Globally optimal selection of k salient steps over a pair-cost oracle.

The optimizer is a dynamic program over chains that start at the first frame
of the focus range and end at the last: D[c][j] is the minimum cost of a
chain of c candidate frames ending at j, transitions may not skip a pinned
frame, and excluded frames are never candidates. A brute-force enumerator
with the same tie-break serves as the test oracle, and two baselines (even
spacing, trajectory simplification) support method comparisons.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .aggregation import AggregationKind, statistical_cost_matrix
from .errors import BoundsError, ConstraintError
from .grids import FocusRange, Region

DEFAULT_GAMMA = 0.3
DEFAULT_SIGMA = 1.0

CostOracle = Callable[[int, int], float]


@dataclass(frozen=True)
class SelectionParams:
    """User priorities and constraints for one selection request."""

    range: FocusRange
    k: int
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = DEFAULT_GAMMA
    sigma: float = DEFAULT_SIGMA
    aggregation: AggregationKind = AggregationKind.AVG
    region: Region | None = None
    pinned: frozenset[int] = frozenset()
    excluded: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pinned", frozenset(self.pinned))
        object.__setattr__(self, "excluded", frozenset(self.excluded))
        if not 0.0 <= self.alpha <= 1.0 or not 0.0 <= self.beta <= 1.0:
            raise ConstraintError("alpha and beta must lie in [0, 1]")
        if abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ConstraintError(f"alpha + beta must equal 1, got {self.alpha + self.beta}")
        if self.k < 2:
            raise ConstraintError(f"k must be at least 2, got {self.k}")
        if self.sigma <= 0:
            raise ConstraintError("sigma must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConstraintError("gamma must lie in [0, 1]")
        if self.pinned & self.excluded:
            raise ConstraintError("pinned and excluded sets overlap")
        lo, hi = self.range.start, self.range.end
        for idx in self.pinned | self.excluded:
            if not lo <= idx <= hi:
                raise ConstraintError(f"index {idx} outside focus range {lo}:{hi}")
        if lo in self.excluded or hi in self.excluded:
            raise ConstraintError("focus range endpoints cannot be excluded")
        anchors = set(self.pinned) | {lo, hi}
        if len(anchors) > self.k:
            raise ConstraintError(
                f"k={self.k} too small for {len(anchors)} pinned/endpoint frames"
            )
        candidates = self.range.length - len(self.excluded)
        if self.k > candidates:
            raise ConstraintError(f"k={self.k} exceeds {candidates} candidate frames")


@dataclass(frozen=True)
class PairCost:
    """Cost breakdown of one consecutive selected pair."""

    i: int
    j: int
    combined: float
    structural: float | None = None
    statistical: float | None = None
    distance: float | None = None


@dataclass(frozen=True)
class SelectionResult:
    steps: tuple[int, ...]
    total_cost: float
    pair_costs: tuple[PairCost, ...]
    params_echo: SelectionParams | None = field(default=None, compare=False)


def distance_cost(i: int, j: int, n: int, k: int, gamma: float = DEFAULT_GAMMA,
                  sigma: float = DEFAULT_SIGMA) -> float:
    """Penalty discouraging temporally clustered picks; saturates at 1 - gamma."""
    return float(-gamma * math.tanh(abs(i - j) / (sigma * n / k)) + 1.0)


def distance_cost_matrix(n: int, k: int, gamma: float = DEFAULT_GAMMA,
                         sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    idx = np.arange(n, dtype=np.float64)
    gaps = np.abs(idx[:, None] - idx[None, :])
    return -gamma * np.tanh(gaps / (sigma * n / k)) + 1.0


def combined_cost(i: int, j: int, params: SelectionParams,
                  struc_matrix: np.ndarray, stat_series: np.ndarray) -> float:
    """Weighted pair cost: alpha*structural + beta*statistical + distance.

    Indices are relative to the focus range; ``stat_series`` is the
    normalized aggregate series of that range.
    """
    n = params.range.length
    c_struc = float(struc_matrix[i, j])
    vi, vj = float(stat_series[i]), float(stat_series[j])
    c_stat = 1.0 if (np.isnan(vi) or np.isnan(vj)) else float(1.0 - np.tanh(abs(vi - vj)))
    c_dis = distance_cost(i, j, n, params.k, params.gamma, params.sigma)
    return params.alpha * c_struc + params.beta * c_stat + c_dis


def combined_cost_matrix(params: SelectionParams, struc_matrix: np.ndarray,
                         stat_series: np.ndarray) -> np.ndarray:
    n = params.range.length
    if struc_matrix.shape != (n, n):
        raise BoundsError(f"structural matrix {struc_matrix.shape} vs range length {n}")
    if stat_series.shape[0] != n:
        raise BoundsError(f"series length {stat_series.shape[0]} vs range length {n}")
    dist = distance_cost_matrix(n, params.k, params.gamma, params.sigma)
    stat = statistical_cost_matrix(stat_series)
    return params.alpha * struc_matrix + params.beta * stat + dist


def _as_matrix(T: int, cost: CostOracle | np.ndarray) -> np.ndarray:
    if isinstance(cost, np.ndarray):
        if cost.shape != (T, T):
            raise BoundsError(f"cost matrix {cost.shape} does not match T={T}")
        return np.asarray(cost, dtype=np.float64)
    mat = np.empty((T, T), dtype=np.float64)
    for i in range(T):
        for j in range(T):
            mat[i, j] = cost(i, j)
    return mat


def _validate_constraints(T: int, k: int, pinned: Iterable[int],
                          excluded: Iterable[int]) -> tuple[frozenset[int], frozenset[int]]:
    pinned = frozenset(pinned)
    excluded = frozenset(excluded)
    if T < 2:
        raise ConstraintError(f"need at least 2 frames, got {T}")
    for idx in pinned | excluded:
        if not 0 <= idx < T:
            raise ConstraintError(f"index {idx} outside 0..{T - 1}")
    if 0 in excluded or T - 1 in excluded:
        raise ConstraintError("endpoints cannot be excluded")
    if pinned & excluded:
        raise ConstraintError("pinned and excluded sets overlap")
    anchors = set(pinned) | {0, T - 1}
    if k < len(anchors):
        raise ConstraintError(f"k={k} too small for {len(anchors)} mandatory frames")
    if k < 2 or k > T - len(excluded):
        raise ConstraintError(f"k={k} infeasible for {T - len(excluded)} candidates")
    return pinned, excluded


def select_salient(T: int, k: int, cost: CostOracle | np.ndarray,
                   pinned: Iterable[int] = (), excluded: Iterable[int] = (),
                   components: dict[str, np.ndarray] | None = None,
                   params_echo: SelectionParams | None = None) -> SelectionResult:
    """Globally optimal k-step chain from frame 0 to frame T-1.

    Cost ties resolve toward the smallest predecessor index during the
    backtrack, so the step sequence is deterministic. ``components`` may
    carry per-kind matrices (structural/statistical/distance) used only to
    annotate the per-pair breakdown.
    """
    pinned, excluded = _validate_constraints(T, k, pinned, excluded)
    mat = _as_matrix(T, cost)

    candidate = np.ones(T, dtype=bool)
    candidate[list(excluded)] = False

    # prev_pin[j]: the closest pinned index below j; transitions from any
    # t < prev_pin[j] would skip that pin and are forbidden.
    prev_pin = np.zeros(T, dtype=np.int64)
    pin_sorted = sorted(pinned)
    last = 0
    pos = 0
    for j in range(T):
        while pos < len(pin_sorted) and pin_sorted[pos] < j:
            last = pin_sorted[pos]
            pos += 1
        prev_pin[j] = last

    t_idx = np.arange(T)
    valid = (t_idx[:, None] < t_idx[None, :])
    valid &= candidate[:, None] & candidate[None, :]
    valid &= t_idx[:, None] >= prev_pin[None, :]

    # transposed layout keeps the reduction axis contiguous
    blocked = np.where(valid, mat, np.inf).T.copy()

    dist = np.full((k + 1, T), np.inf)
    pred = np.zeros((k + 1, T), dtype=np.int64)
    dist[1][0] = 0.0
    work = np.empty_like(blocked)
    for c in range(2, k + 1):
        np.add(blocked, dist[c - 1][None, :], out=work)
        pred[c] = np.argmin(work, axis=1)
        dist[c] = work[t_idx, pred[c]]

    total = float(dist[k][T - 1])
    if not np.isfinite(total):
        raise ConstraintError("constraints admit no feasible selection")

    steps = [T - 1]
    cur = T - 1
    for c in range(k, 1, -1):
        cur = int(pred[c][cur])
        steps.append(cur)
    steps.reverse()
    return _assemble_result(tuple(steps), mat, components, params_echo)


def _assemble_result(steps: tuple[int, ...], mat: np.ndarray,
                     components: dict[str, np.ndarray] | None,
                     params_echo: SelectionParams | None) -> SelectionResult:
    comp = components or {}
    pairs = []
    total = 0.0
    for i, j in zip(steps, steps[1:]):
        total = total + float(mat[i, j])
        pairs.append(PairCost(
            i=i, j=j, combined=float(mat[i, j]),
            structural=float(comp["structural"][i, j]) if "structural" in comp else None,
            statistical=float(comp["statistical"][i, j]) if "statistical" in comp else None,
            distance=float(comp["distance"][i, j]) if "distance" in comp else None,
        ))
    return SelectionResult(steps=steps, total_cost=total, pair_costs=tuple(pairs),
                           params_echo=params_echo)


def brute_force_select(T: int, k: int, cost: CostOracle | np.ndarray,
                       pinned: Iterable[int] = (), excluded: Iterable[int] = (),
                       components: dict[str, np.ndarray] | None = None) -> SelectionResult:
    """Exhaustive oracle for :func:`select_salient` on small instances.

    Shares the optimizer's tie-break: among equal-cost selections the chain
    whose reversed index sequence is lexicographically smallest wins, which
    is exactly the sequence the DP backtrack (smallest predecessor first)
    reconstructs.
    """
    pinned, excluded = _validate_constraints(T, k, pinned, excluded)
    if math.comb(max(T - 2, 0), max(k - 2, 0)) > 10**6:
        raise ConstraintError("instance too large for exhaustive enumeration")
    mat = _as_matrix(T, cost)

    middles = [i for i in range(1, T - 1) if i not in excluded]
    must = pinned - {0, T - 1}
    best: tuple[float, tuple[int, ...], tuple[int, ...]] | None = None
    for combo in itertools.combinations(middles, k - 2):
        if not must.issubset(combo):
            continue
        seq = (0, *combo, T - 1)
        total = 0.0
        for i, j in zip(seq, seq[1:]):
            total = total + float(mat[i, j])
        key = (total, tuple(reversed(seq)))
        if best is None or key < (best[0], best[2]):
            best = (total, seq, tuple(reversed(seq)))
    if best is None:
        raise ConstraintError("constraints admit no feasible selection")
    return _assemble_result(best[1], mat, components, None)


def even_selection(T: int, k: int) -> tuple[int, ...]:
    """k steps spread uniformly over 0..T-1 (integer-exact rounding).

    Halves round down so an even pick stays on the low side of midpoints.
    """
    if k < 2 or k > T:
        raise ConstraintError(f"even selection needs 2 <= k <= T, got k={k}, T={T}")
    steps = []
    den = k - 1
    for i in range(k):
        num = i * (T - 1)
        q, r = divmod(num, den)
        steps.append(q + (1 if 2 * r > den else 0))
    return tuple(steps)


def arc_based_selection(points: Sequence[tuple[float, float]] | np.ndarray,
                        eps: float = 0.3, theta: float = math.pi / 4,
                        mix: float = 0.5) -> tuple[int, ...]:
    """Trajectory-simplification baseline over a 2D embedding.

    Walks the polyline accumulating arc length and absolute turning angle
    since the last pick; point i is picked once
    mix*(arc/eps) + (1-mix)*(angle/theta) reaches 1. Both endpoints are
    always picked. Points are expected on a unit-diagonal bounding box.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise BoundsError("need at least two 2D points")
    n = pts.shape[0]
    selected = {0, n - 1}
    arc = 0.0
    angle = 0.0
    for i in range(1, n - 1):
        seg_in = pts[i] - pts[i - 1]
        seg_out = pts[i + 1] - pts[i]
        arc += float(np.hypot(*seg_in))
        angle += _turn_angle(seg_in, seg_out)
        trigger = mix * (arc / eps) + (1.0 - mix) * (angle / theta)
        if trigger >= 1.0:
            selected.add(i)
            arc = 0.0
            angle = 0.0
    return tuple(sorted(selected))


def _turn_angle(a: np.ndarray, b: np.ndarray) -> float:
    na = np.hypot(*a)
    nb = np.hypot(*b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    cosang = float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))
    return math.acos(cosang)


def normalize_trajectory(points: np.ndarray) -> np.ndarray:
    """Rescale points so their bounding box has unit diagonal."""
    pts = np.asarray(points, dtype=np.float64)
    span = pts.max(axis=0) - pts.min(axis=0)
    diag = float(np.hypot(*span))
    if diag == 0.0:
        return pts - pts.min(axis=0)
    return (pts - pts.min(axis=0)) / diag


def arc_selection_with_count(points: np.ndarray, k: int,
                             eps: float = 0.3, theta: float = math.pi / 4,
                             mix: float = 0.5) -> tuple[int, ...]:
    """Arc-based pick tuned toward exactly k steps.

    The trigger thresholds scale monotonically with a single factor; a
    bisection over that factor finds the selection whose size is closest to
    k (exact when reachable). The achieved selection is returned as-is.
    """
    n = len(points)
    if k >= n:
        return tuple(range(n))
    lo, hi = 1e-4, 1e4
    best = arc_based_selection(points, eps, theta, mix)
    if len(best) == k:
        return best
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        sel = arc_based_selection(points, eps * mid, theta * mid, mix)
        if abs(len(sel) - k) < abs(len(best) - k) or (
            abs(len(sel) - k) == abs(len(best) - k) and len(sel) > len(best)
        ):
            best = sel
        if len(sel) == k:
            return sel
        if len(sel) > k:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1 + 1e-12:
            break
    return best
