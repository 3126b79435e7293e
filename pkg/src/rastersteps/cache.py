"""Capacity-bounded LRU cache with single-flight builds for derived artifacts."""

from __future__ import annotations

import sys
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .grids import FocusRange, Region


@dataclass(frozen=True)
class CacheKey:
    """Identity of a derived artifact; equal keys serialize identically."""

    dataset_id: str
    kind: str  # codes | struc-matrix | agg-series | embedding | ...
    region: Region | None = None
    range: FocusRange | None = None
    extra: str = ""

    def canonical(self) -> str:
        region = "whole" if self.region is None else \
            f"{self.region.x0},{self.region.y0},{self.region.x1},{self.region.y1}"
        rng = "full" if self.range is None else f"{self.range.start}:{self.range.end}"
        return f"{self.dataset_id}|{self.kind}|{region}|{rng}|{self.extra}"


def _sizeof(value: Any) -> int:
    if isinstance(value, np.ndarray):
        return int(value.nbytes)
    if isinstance(value, (list, tuple)):
        return sum(_sizeof(v) for v in value) + sys.getsizeof(value)
    if hasattr(value, "values") and isinstance(getattr(value, "values"), np.ndarray):
        return int(value.values.nbytes)
    return sys.getsizeof(value)


class DerivedCache:
    """LRU cache keyed by :class:`CacheKey`.

    Concurrent misses on one key run the builder exactly once; other callers
    block on the key's lock and then read the stored value. Eviction is
    least-recently-used once the byte budget is exceeded, but the most
    recent entry always stays so a single oversized artifact still caches.
    """

    def __init__(self, capacity_bytes: int = 256 * 1024 * 1024):
        self.capacity_bytes = capacity_bytes
        self._entries: OrderedDict[str, tuple[Any, int]] = OrderedDict()
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}
        self.build_count = 0
        self.hit_count = 0

    def get_or_build(self, key: CacheKey, builder: Callable[[], Any]) -> Any:
        ck = key.canonical()
        with self._lock:
            if ck in self._entries:
                self._entries.move_to_end(ck)
                self.hit_count += 1
                return self._entries[ck][0]
            key_lock = self._key_locks.setdefault(ck, threading.Lock())
        with key_lock:
            with self._lock:
                if ck in self._entries:
                    self._entries.move_to_end(ck)
                    self.hit_count += 1
                    return self._entries[ck][0]
            value = builder()
            with self._lock:
                self.build_count += 1
                self._entries[ck] = (value, _sizeof(value))
                self._entries.move_to_end(ck)
                self._evict()
            return value

    def peek(self, key: CacheKey) -> Any | None:
        with self._lock:
            entry = self._entries.get(key.canonical())
            return entry[0] if entry else None

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._key_locks.clear()

    @property
    def total_bytes(self) -> int:
        with self._lock:
            return sum(size for _, size in self._entries.values())

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def _evict(self) -> None:
        # caller holds self._lock
        total = sum(size for _, size in self._entries.values())
        while total > self.capacity_bytes and len(self._entries) > 1:
            _, (_, size) = self._entries.popitem(last=False)
            total -= size
