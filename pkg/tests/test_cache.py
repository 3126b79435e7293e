import threading
import time

import numpy as np

from rastersteps import CacheKey, DerivedCache, FocusRange, Region


def key(name="a", region=None, rng=None, extra=""):
    return CacheKey("ds", name, region, rng, extra)


class TestCacheKey:
    def test_equal_keys_equal_canonical(self):
        a = CacheKey("d", "codes", Region(0, 0, 3, 3), FocusRange(0, 9))
        b = CacheKey("d", "codes", Region(0, 0, 3, 3), FocusRange(0, 9))
        assert a == b
        assert a.canonical() == b.canonical()

    def test_region_changes_key(self):
        a = CacheKey("d", "codes", None, None)
        b = CacheKey("d", "codes", Region(0, 0, 1, 1), None)
        assert a.canonical() != b.canonical()


class TestSingleFlight:
    def test_racing_identical_requests_build_once(self):
        cache = DerivedCache()
        calls = []
        barrier = threading.Barrier(16)
        results = []

        def builder():
            calls.append(1)
            time.sleep(0.05)
            return np.arange(10)

        def worker():
            barrier.wait()
            results.append(cache.get_or_build(key(), builder))

        threads = [threading.Thread(target=worker) for _ in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(calls) == 1
        assert cache.build_count == 1
        assert all(np.array_equal(r, np.arange(10)) for r in results)

    def test_different_keys_build_separately(self):
        cache = DerivedCache()
        cache.get_or_build(key("x"), lambda: 1)
        cache.get_or_build(key("y"), lambda: 2)
        assert cache.build_count == 2


class TestLru:
    def test_eviction_by_bytes(self):
        cache = DerivedCache(capacity_bytes=100)
        cache.get_or_build(key(extra="1"), lambda: np.zeros(8))   # 64 bytes
        cache.get_or_build(key(extra="2"), lambda: np.zeros(8))   # exceeds 100
        assert len(cache) == 1
        assert cache.peek(key(extra="2")) is not None
        assert cache.peek(key(extra="1")) is None

    def test_recent_use_protects_entry(self):
        cache = DerivedCache(capacity_bytes=140)
        cache.get_or_build(key(extra="1"), lambda: np.zeros(8))
        cache.get_or_build(key(extra="2"), lambda: np.zeros(8))
        cache.get_or_build(key(extra="1"), lambda: np.zeros(8))  # touch 1
        cache.get_or_build(key(extra="3"), lambda: np.zeros(8))  # evicts 2
        assert cache.peek(key(extra="1")) is not None
        assert cache.peek(key(extra="2")) is None

    def test_evicted_key_rebuilds_identically(self):
        cache = DerivedCache(capacity_bytes=80)
        first = cache.get_or_build(key(extra="1"), lambda: np.arange(8))
        cache.get_or_build(key(extra="2"), lambda: np.zeros(8))
        rebuilt = cache.get_or_build(key(extra="1"), lambda: np.arange(8))
        assert np.array_equal(first, rebuilt)
        assert cache.build_count == 3

    def test_hits_counted(self):
        cache = DerivedCache()
        cache.get_or_build(key(), lambda: 1)
        cache.get_or_build(key(), lambda: 1)
        assert cache.hit_count == 1
