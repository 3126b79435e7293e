import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rastersteps import (
    BoundsError,
    EmptyDataError,
    FormatError,
    FocusRange,
    GridFrame,
    NormStats,
    Region,
    SyntheticSpec,
    crop,
    export_stack,
    fill_nan,
    ingest_stack,
    normalize,
    synthesize,
)
from rastersteps.grids import denormalize, parse_range, parse_region

from conftest import make_dataset


def write_stack(tmp_path, frames, width, height, fmt="f32"):
    tmp_path.mkdir(parents=True, exist_ok=True)
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    meta = {
        "id": "fixture",
        "variable": "v",
        "width": width,
        "height": height,
        "count": len(frames),
        "timestamps": [f"2021-03-{i + 1:02d}T12:00:00+00:00" for i in range(len(frames))],
        "extent": [0.0, 0.0, 1.0, 1.0],
    }
    (tmp_path / "meta.json").write_text(json.dumps(meta))
    for i, frame in enumerate(frames):
        if fmt == "f32":
            (tmp_path / f"frame_{i:06d}.f32").write_bytes(frame.astype("<f4").tobytes())
        else:
            rows = []
            for row in frame:
                rows.append(",".join("nan" if math.isnan(v) else repr(float(v)) for v in row))
            (tmp_path / f"frame_{i:06d}.csv").write_text("\n".join(rows))
    return tmp_path


class TestIngest:
    def test_three_frames_nan_aware_stats(self, tmp_path):
        frames = [[[0, 1], [2, 3]], [[4, 5], [6, 7]], [[8, 9], [np.nan, 11]]]
        ds = ingest_stack(write_stack(tmp_path, frames, 2, 2))
        assert ds.t == 3
        assert ds.norm == NormStats(0.0, 11.0)

    def test_missing_frame_is_format_error(self, tmp_path):
        write_stack(tmp_path, [[[1.0]], [[2.0]], [[3.0]]], 1, 1)
        (tmp_path / "frame_000001.f32").unlink()
        with pytest.raises(FormatError):
            ingest_stack(tmp_path)

    def test_single_frame_dataset(self, tmp_path):
        ds = ingest_stack(write_stack(tmp_path, [[[1.0, 2.0]]], 2, 1))
        assert ds.t == 1

    def test_wrong_frame_size_is_format_error(self, tmp_path):
        write_stack(tmp_path, [[[1.0, 2.0]]], 2, 1)
        (tmp_path / "frame_000000.f32").write_bytes(b"\0" * 12)
        with pytest.raises(FormatError):
            ingest_stack(tmp_path)

    def test_all_nan_dataset_rejected(self, tmp_path):
        write_stack(tmp_path, [[[np.nan, np.nan]]], 2, 1)
        with pytest.raises(EmptyDataError):
            ingest_stack(tmp_path)

    def test_csv_frames_accepted(self, tmp_path):
        frames = [[[0.5, np.nan], [1.5, 2.5]]]
        ds = ingest_stack(write_stack(tmp_path, frames, 2, 2, fmt="csv"))
        assert np.isnan(ds.cube[0, 0, 1])
        assert ds.cube[0, 1, 1] == 2.5

    def test_timestamps_must_increase(self, tmp_path):
        write_stack(tmp_path, [[[1.0]], [[2.0]]], 1, 1)
        meta = json.loads((tmp_path / "meta.json").read_text())
        meta["timestamps"] = [meta["timestamps"][0]] * 2
        (tmp_path / "meta.json").write_text(json.dumps(meta))
        with pytest.raises(FormatError):
            ingest_stack(tmp_path)


class TestRoundTrip:
    def test_export_ingest_bit_exact(self, tmp_path):
        frames = [[[0, 1], [2, 3]], [[4, np.nan], [6, 7]]]
        src = ingest_stack(write_stack(tmp_path / "src", frames, 2, 2))
        out = export_stack(src, tmp_path / "copy")
        dup = ingest_stack(out)
        assert np.array_equal(src.cube, dup.cube, equal_nan=True)
        assert src.timestamps == dup.timestamps
        for i in range(src.t):
            a = (tmp_path / "src" / f"frame_{i:06d}.f32").read_bytes()
            b = (out / f"frame_{i:06d}.f32").read_bytes()
            assert a == b


class TestCrop:
    def test_center_block(self):
        frame = GridFrame(np.arange(16, dtype=float).reshape(4, 4))
        out = crop(frame, Region(1, 1, 2, 2))
        assert out.data.tolist() == [[5.0, 6.0], [9.0, 10.0]]

    def test_full_region_identity(self):
        frame = GridFrame(np.arange(16, dtype=float).reshape(4, 4))
        out = crop(frame, Region(0, 0, 3, 3))
        assert out == frame

    def test_single_cell(self):
        frame = GridFrame(np.arange(16, dtype=float).reshape(4, 4))
        out = crop(frame, Region(3, 3, 3, 3))
        assert out.data.shape == (1, 1)
        assert out.data[0, 0] == 15.0

    def test_out_of_bounds(self):
        frame = GridFrame(np.zeros((4, 4)))
        with pytest.raises(BoundsError):
            crop(frame, Region(2, 2, 4, 3))

    @given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
    def test_crop_composes_with_full_crop(self, x0, y0, dx, dy):
        frame = GridFrame(np.arange(64, dtype=float).reshape(8, 8))
        region = Region(x0, y0, min(x0 + dx, 7), min(y0 + dy, 7))
        full = crop(frame, Region(0, 0, 7, 7))
        assert crop(full, region) == crop(frame, region)


class TestNormalize:
    def test_midpoint(self):
        frame = GridFrame([[5.0]])
        assert normalize(frame, NormStats(0, 10)).data[0, 0] == 0.5

    def test_extremes(self):
        frame = GridFrame([[0.0, 10.0]])
        out = normalize(frame, NormStats(0, 10))
        assert out.data.tolist() == [[0.0, 1.0]]

    def test_nan_preserved(self):
        out = normalize(GridFrame([[np.nan, 5.0]]), NormStats(0, 10))
        assert np.isnan(out.data[0, 0])

    def test_degenerate_range_maps_to_zero(self):
        out = normalize(GridFrame([[7.0, np.nan]]), NormStats(7, 7))
        assert out.data[0, 0] == 0.0
        assert np.isnan(out.data[0, 1])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=16))
    def test_round_trip(self, values):
        arr = np.asarray(values).reshape(1, -1)
        norm = NormStats(float(np.min(arr)), float(np.max(arr)))
        if norm.vmax == norm.vmin:
            return
        back = denormalize(normalize(GridFrame(arr), norm), norm)
        assert np.allclose(back.data, arr, rtol=1e-6, atol=1e-6 * max(1.0, abs(norm.vmax)))


class TestFillNan:
    def test_basic(self):
        out = fill_nan(GridFrame([[1.0, np.nan]]))
        assert out.data.tolist() == [[1.0, 0.0]]

    def test_identity_without_nan(self):
        frame = GridFrame([[1.0, 2.0]])
        assert fill_nan(frame) == frame

    def test_all_nan(self):
        out = fill_nan(GridFrame([[np.nan, np.nan]]))
        assert out.data.tolist() == [[0.0, 0.0]]


class TestNormStats:
    def test_nan_cells_do_not_move_extrema(self):
        base = make_dataset([[[1.0, 5.0]], [[2.0, 4.0]]])
        withnan = make_dataset([[[1.0, 5.0], [np.nan, np.nan]],
                                [[2.0, 4.0], [np.nan, np.nan]]])
        assert base.norm == withnan.norm


class TestSynthesize:
    def test_ramp_frames_constant(self):
        ds = synthesize(SyntheticSpec("ramp", t=10, width=8, height=8))
        for i in range(10):
            assert np.allclose(ds.cube[i], i / 9)

    def test_burst_structure(self):
        ds = synthesize(SyntheticSpec("burst", t=10, width=8, height=8, bursts=(5,)))
        for i in range(5):
            assert np.array_equal(ds.cube[i], ds.cube[0])
        assert not np.array_equal(ds.cube[5], ds.cube[0])
        for i in range(6, 10):
            assert np.array_equal(ds.cube[i], ds.cube[0])

    def test_same_seed_bit_identical(self):
        spec = SyntheticSpec("seasonal", t=12, width=6, height=6, seed=42)
        a = synthesize(spec)
        b = synthesize(spec)
        assert np.array_equal(a.cube, b.cube)
        assert a.cube.tobytes() == b.cube.tobytes()

    def test_blob_moves(self):
        ds = synthesize(SyntheticSpec("blob", t=5, width=16, height=16))
        assert not np.array_equal(ds.cube[0], ds.cube[4])

    def test_burst_index_bounds(self):
        with pytest.raises(BoundsError):
            SyntheticSpec("burst", t=5, width=4, height=4, bursts=(7,))


class TestParsers:
    def test_region(self):
        assert parse_region("1,2,3,4") == Region(1, 2, 3, 4)
        with pytest.raises(FormatError):
            parse_region("1,2,3")

    def test_range(self):
        assert parse_range("3:9") == FocusRange(3, 9)
        with pytest.raises(FormatError):
            parse_range("3-9")
        with pytest.raises(BoundsError):
            parse_range("9:3")


class TestFocusRange:
    def test_validate(self):
        FocusRange(0, 5).validate(6)
        with pytest.raises(BoundsError):
            FocusRange(0, 5).validate(5)
        with pytest.raises(BoundsError):
            FocusRange(2, 2)
