import json

import numpy as np
import pytest

from specclass.errors import DataError
from specclass.raster import (ClassInfo, LabelMask, Raster, as_label_mask, payload_path,
                              read_label_mask, read_raster, write_label_mask, write_raster)


def test_round_trip_is_bit_exact(tmp_path, small_raster):
    write_raster(small_raster, tmp_path / "img")
    back = read_raster(tmp_path / "img.hdr.json")
    assert back.data.tobytes() == small_raster.data.tobytes()
    assert back.band_names == small_raster.band_names
    assert back.pixel_size == small_raster.pixel_size


def test_payload_size_and_layout(tmp_path):
    data = np.arange(6, dtype=np.float32).reshape(1, 2, 3)
    write_raster(Raster(data), tmp_path / "r")
    raw = payload_path(tmp_path / "r").read_bytes()
    assert len(raw) == 24
    assert np.frombuffer(raw, "<f4").tolist() == [0, 1, 2, 3, 4, 5]


def test_band_sequential_order(tmp_path):
    data = np.stack([np.full((2, 2), 1.0), np.full((2, 2), 2.0)]).astype(np.float32)
    write_raster(Raster(data), tmp_path / "r")
    vals = np.frombuffer(payload_path(tmp_path / "r").read_bytes(), "<f4")
    assert vals.tolist() == [1, 1, 1, 1, 2, 2, 2, 2]


def test_constant_raster_payload(tmp_path):
    write_raster(Raster(np.full((1, 2, 2), 5.0, np.float32)), tmp_path / "c")
    raw = payload_path(tmp_path / "c").read_bytes()
    assert len(raw) == 16
    assert np.all(np.frombuffer(raw, "<f4") == 5.0)


def test_write_is_deterministic(tmp_path, small_raster):
    write_raster(small_raster, tmp_path / "a")
    write_raster(small_raster, tmp_path / "b")
    assert (tmp_path / "a.hdr.json").read_bytes() == (tmp_path / "b.hdr.json").read_bytes()
    assert (tmp_path / "a.bsq").read_bytes() == (tmp_path / "b.bsq").read_bytes()


def test_header_fields(tmp_path, small_raster):
    write_raster(small_raster, tmp_path / "h")
    header = json.loads((tmp_path / "h.hdr.json").read_text())
    assert header == {"width": 5, "height": 6, "bands": 3, "band_names": ["b1", "b2", "b3"],
                      "pixel_size_m": 2.44}


def test_size_mismatch_is_an_error(tmp_path):
    (tmp_path / "bad.hdr.json").write_text(json.dumps(
        {"width": 4, "height": 4, "bands": 2, "band_names": ["a", "b"], "pixel_size_m": 1.0}))
    (tmp_path / "bad.bsq").write_bytes(b"\0" * 100)
    with pytest.raises(DataError, match="100 bytes"):
        read_raster(tmp_path / "bad.hdr.json")


def test_missing_and_corrupt_header(tmp_path):
    with pytest.raises(DataError, match="not found"):
        read_raster(tmp_path / "nothing.hdr.json")
    (tmp_path / "x.hdr.json").write_text("{not json")
    (tmp_path / "x.bsq").write_bytes(b"")
    with pytest.raises(DataError, match="corrupt"):
        read_raster(tmp_path / "x.hdr.json")


def test_non_finite_payload_rejected(tmp_path):
    (tmp_path / "n.hdr.json").write_text(json.dumps({"width": 1, "height": 1, "bands": 1}))
    (tmp_path / "n.bsq").write_bytes(np.array([np.nan], "<f4").tobytes())
    with pytest.raises(DataError, match="non-finite"):
        read_raster(tmp_path / "n")


def test_pixel_size_defaults_when_absent(tmp_path):
    (tmp_path / "d.hdr.json").write_text(json.dumps({"width": 1, "height": 1, "bands": 1}))
    (tmp_path / "d.bsq").write_bytes(np.array([1.0], "<f4").tobytes())
    assert read_raster(tmp_path / "d").pixel_size == 2.44


def test_invariants_enforced():
    with pytest.raises(DataError):
        Raster(np.array([[[np.nan]]]))
    with pytest.raises(DataError):
        Raster(np.ones((1, 2, 2)), pixel_size=0.0)
    with pytest.raises(DataError):
        Raster(np.ones((2, 2, 2)), band_names=("only one",))


def test_nan_rejected_before_writing(tmp_path):
    class Fake:
        data = np.array([[[1.0, np.nan]]])
        width, height, bands, band_names, pixel_size = 2, 1, 1, ("b",), 1.0

    with pytest.raises(DataError):
        write_raster(Fake(), tmp_path / "f")
    assert not (tmp_path / "f.hdr.json").exists()
    assert not (tmp_path / "f.bsq").exists()


def test_raster_is_immutable(small_raster):
    with pytest.raises(ValueError):
        small_raster.data[0, 0, 0] = 1.0


def test_pixels_are_row_major_feature_vectors():
    data = np.arange(12, dtype=np.float64).reshape(2, 2, 3)
    X = Raster(data).pixels()
    assert X.shape == (6, 2)
    assert X[4].tolist() == [data[0, 1, 1], data[1, 1, 1]]


class TestLabelMask:
    def test_zero_raster_is_all_unlabeled(self):
        mask = as_label_mask(Raster(np.zeros((1, 3, 3))), {})
        assert not mask.labels.any()

    def test_fractional_label_rejected(self):
        with pytest.raises(DataError, match="non-integer"):
            as_label_mask(Raster(np.array([[[1.0, 2.5]]])), {1: ClassInfo("a"), 2: ClassInfo("b")})

    def test_negative_label_rejected(self):
        with pytest.raises(DataError, match="negative"):
            as_label_mask(Raster(np.array([[[-1.0]]])), {})

    def test_multiband_rejected(self):
        with pytest.raises(DataError, match="1 band"):
            as_label_mask(Raster(np.zeros((2, 1, 1))), {})

    def test_coverage_satisfied(self):
        table = {1: ClassInfo("Trees"), 3: ClassInfo("Roads")}
        mask = as_label_mask(Raster(np.array([[[1.0, 3.0, 0.0]]])), table)
        assert mask.class_ids == [1, 3]

    def test_missing_class_rejected(self):
        with pytest.raises(DataError, match=r"\[2\]"):
            as_label_mask(Raster(np.array([[[1.0, 2.0]]])), {1: ClassInfo("a")})

    def test_class_zero_reserved(self):
        with pytest.raises(DataError):
            LabelMask(np.zeros((1, 1), np.uint32), {0: ClassInfo("nope")})

    def test_conversion_is_idempotent(self, tmp_path, three_class_mask):
        write_label_mask(three_class_mask, tmp_path / "m")
        once, _ = read_label_mask(tmp_path / "m.hdr.json")
        write_label_mask(once, tmp_path / "m2")
        twice, _ = read_label_mask(tmp_path / "m2")
        assert once == three_class_mask
        assert twice == once

    def test_missing_class_table_file(self, tmp_path, three_class_mask):
        write_raster(three_class_mask.to_raster(), tmp_path / "bare")
        with pytest.raises(DataError, match="class table"):
            read_label_mask(tmp_path / "bare")
