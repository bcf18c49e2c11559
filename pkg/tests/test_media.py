import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapcfl.media import (
    Frame,
    downsample_2x2,
    gray_frame,
    load_frame,
    pnm_bytes,
    read_pnm,
    read_y4m,
    rgb_to_ycbcr,
    save_frame,
    to_uint8,
    upsample_2x2,
    y4m_bytes,
    ycbcr_to_rgb,
)


def test_to_uint8_rounds_half_up_and_clips():
    np.testing.assert_array_equal(to_uint8([-3.0, 0.49, 0.5, 254.5, 300.0]), [0, 0, 1, 255, 255])


def test_colour_constants():
    frame = rgb_to_ycbcr(np.array([[[255, 255, 255], [0, 0, 0]]], dtype=np.uint8))
    np.testing.assert_array_equal(frame.y, [[255, 0]])
    np.testing.assert_array_equal(frame.cb, [[128, 128]])
    red = rgb_to_ycbcr(np.array([[[255, 0, 0]]], dtype=np.uint8))
    assert (int(red.y[0, 0]), int(red.cb[0, 0]), int(red.cr[0, 0])) == (76, 85, 255)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_colour_round_trip_within_rounding(seed):
    rgb = np.random.default_rng(seed).integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
    back = ycbcr_to_rgb(rgb_to_ycbcr(rgb))
    assert np.abs(back.astype(int) - rgb).max() <= 3


def test_box_resampling():
    plane = np.arange(16.0).reshape(4, 4)
    np.testing.assert_array_equal(downsample_2x2(plane), [[2.5, 4.5], [10.5, 12.5]])
    np.testing.assert_array_equal(upsample_2x2(np.array([[1, 2]]), (2, 3)), [[1, 1, 2], [1, 1, 2]])


def test_frame_validates_shapes():
    y = np.zeros((4, 6), np.uint8)
    Frame(y, np.zeros((2, 3), np.uint8), np.zeros((2, 3), np.uint8), 420)
    with pytest.raises(ValueError):
        Frame(y, np.zeros((4, 6), np.uint8), np.zeros((4, 6), np.uint8), 420)
    with pytest.raises(ValueError):
        Frame(y, y, y, 422)
    with pytest.raises(ValueError):
        rgb_to_ycbcr(np.zeros((3, 4, 3)), 420)


def test_pnm_round_trip(tmp_path, rng):
    rgb = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
    gray = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
    for name, img in (("a.ppm", rgb), ("a.pgm", gray)):
        (tmp_path / name).write_bytes(pnm_bytes(img))
        np.testing.assert_array_equal(read_pnm(tmp_path / name), img)


def test_pnm_with_comments(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n\x01\x02")
    np.testing.assert_array_equal(read_pnm(tmp_path / "c.pgm"), [[1, 2]])


@pytest.mark.parametrize("payload", [b"P3\n1 1\n255\n1 2 3", b"P5\n2 2\n255\n\x00", b"P5\n1 1\n65535\n\x00\x00", b"P5"])
def test_pnm_rejects_bad_files(tmp_path, payload):
    (tmp_path / "bad.pgm").write_bytes(payload)
    with pytest.raises(ValueError):
        read_pnm(tmp_path / "bad.pgm")


@pytest.mark.parametrize("sub", [420, 444])
def test_y4m_round_trip(tmp_path, rng, sub):
    rgb = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
    frame = rgb_to_ycbcr(rgb, sub)
    save_frame(tmp_path / "f.y4m", frame)
    back = read_y4m(tmp_path / "f.y4m")
    assert back.subsampling == sub
    for name in ("y", "cb", "cr"):
        np.testing.assert_array_equal(getattr(back, name), getattr(frame, name))
    assert load_frame(tmp_path / "f.y4m").subsampling == sub
    with pytest.raises(ValueError):
        load_frame(tmp_path / "f.y4m", 444 if sub == 420 else 420)


def test_y4m_truncated(tmp_path):
    data = y4m_bytes(gray_frame(np.zeros((4, 4), np.uint8), 420))
    (tmp_path / "t.y4m").write_bytes(data[:-1])
    with pytest.raises(ValueError):
        read_y4m(tmp_path / "t.y4m")


def test_load_gray_gives_neutral_chroma(tmp_path):
    (tmp_path / "g.pgm").write_bytes(pnm_bytes(np.full((4, 6), 9, np.uint8)))
    frame = load_frame(tmp_path / "g.pgm")
    assert frame.subsampling == 420 and frame.cb.shape == (2, 3)
    assert np.all(frame.cb == 128) and np.all(frame.y == 9)


def test_save_uses_normal_permissions(tmp_path):
    path = tmp_path / "out.ppm"
    save_frame(path, gray_frame(np.zeros((2, 2), np.uint8)))
    mask = os.umask(0)
    os.umask(mask)
    assert path.stat().st_mode & 0o777 == 0o666 & ~mask
    assert [p.name for p in tmp_path.iterdir()] == ["out.ppm"]
