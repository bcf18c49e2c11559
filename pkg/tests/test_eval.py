import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapcfl.eval import (
    BdError,
    RdPoint,
    Row,
    SweepConfig,
    bd_metrics,
    bd_table,
    corpus_curves,
    format_report,
    op_counters,
    psnr,
    rd_sweep,
    read_csv,
    rows_to_csv,
    ssim,
    ssim_db,
    write_csv,
)
from lapcfl.media import pnm_bytes

RATES = np.array([1e4, 1.6e4, 2.5e4, 4e4, 6.3e4, 1e5, 1.6e5, 2.5e5])


def curve(rates=RATES, offset=0.0):
    lr = np.log10(rates)
    return [(r, 10 + 6 * x - 0.2 * x * x + offset) for r, x in zip(rates, lr)]


# Metrics --------------------------------------------------------------------


def test_psnr_known_values():
    a = np.zeros((4, 4))
    assert psnr(a, a + 1) == pytest.approx(10 * math.log10(255 ** 2))
    assert psnr(a, a + 1) == pytest.approx(48.1308, abs=1e-4)
    assert psnr(a, a) == 99.0
    with pytest.raises(ValueError):
        psnr(a, np.zeros((4, 5)))


def test_ssim_properties(rng):
    a = rng.integers(0, 256, size=(16, 20)).astype(float)
    b = np.clip(a + rng.normal(scale=20, size=a.shape), 0, 255)
    assert ssim(a, a) == pytest.approx(1.0)
    assert ssim(a, b) == pytest.approx(ssim(b, a))
    assert -1 <= ssim(a, b) < 1
    assert ssim(a, np.clip(a + rng.normal(scale=5, size=a.shape), 0, 255)) > ssim(a, b)
    with pytest.raises(ValueError):
        ssim(np.zeros((7, 20)), np.zeros((7, 20)))


def test_ssim_matches_direct_window_loop(rng):
    a = rng.integers(0, 256, size=(10, 11)).astype(float)
    b = rng.integers(0, 256, size=(10, 11)).astype(float)
    c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
    vals = []
    for i in range(3):
        for j in range(4):
            x, y = a[i:i + 8, j:j + 8], b[i:i + 8, j:j + 8]
            mx, my = x.mean(), y.mean()
            cov = ((x - mx) * (y - my)).mean()
            vals.append((2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (x.var() + y.var() + c2)))
    assert ssim(a, b) == pytest.approx(np.mean(vals), abs=1e-12)


def test_ssim_db():
    assert ssim_db(0.9) == pytest.approx(10.0)
    assert ssim_db(1.0) == 99.0


# BD -------------------------------------------------------------------------


def test_identical_curves_give_zero():
    r = bd_metrics(curve(), curve())
    assert r.delta_rate_percent == pytest.approx(0, abs=1e-9)
    assert r.delta_snr_db == pytest.approx(0, abs=1e-9)


def test_rate_scaling_gives_minus_ten_percent():
    r = bd_metrics(curve(), [(0.9 * r, q) for r, q in curve()])
    assert r.delta_rate_percent == pytest.approx(-10, abs=0.1)


def test_quality_shift_gives_half_db():
    r = bd_metrics(curve(), curve(offset=0.5))
    assert r.delta_snr_db == pytest.approx(0.5, abs=0.01)
    assert r.delta_rate_percent < 0


@settings(max_examples=50)
@given(st.floats(0.7, 1.3), st.floats(-1.0, 1.0))
def test_antisymmetry(scale, offset):
    a, b = curve(), [(scale * r, q + offset) for r, q in curve()]
    ab, ba = bd_metrics(a, b), bd_metrics(b, a)
    assert ab.delta_snr_db == pytest.approx(-ba.delta_snr_db, abs=0.01)
    assert (1 + ab.delta_rate_percent / 100) * (1 + ba.delta_rate_percent / 100) == pytest.approx(1, abs=1e-3)


def test_bd_accepts_points_in_any_order():
    pts = [RdPoint(r, q) for r, q in curve()]
    assert bd_metrics(pts[::-1], curve(offset=0.2)).delta_snr_db == pytest.approx(0.2, abs=1e-6)


@pytest.mark.parametrize("bad", [curve()[:3], [(-1, 1)] + curve()[1:], [(r, 30.0) for r, _ in curve()],
                                 [(r, -q) for r, q in curve()], [(1e4, 1)] + curve()[1:4] + [(1e4, 2)]])
def test_bd_rejects_degenerate_curves(bad):
    with pytest.raises(BdError):
        bd_metrics(curve(), bad)


def test_bd_rejects_disjoint_curves():
    with pytest.raises(BdError):
        bd_metrics(curve(), [(r * 1e6, q + 100) for r, q in curve()])


# Sweep and aggregation --------------------------------------------------------


@pytest.fixture
def tiny_corpus(tmp_path, rng):
    for name in ("a", "b"):
        base = rng.integers(0, 256, size=(5, 5, 3)).astype(float)
        img = np.kron(base, np.ones((5, 5, 1)))[:24, :24]
        (tmp_path / f"{name}.ppm").write_bytes(pnm_bytes(img.astype(np.uint8)))
    (tmp_path / "notes.txt").write_text("ignored")
    return tmp_path


CFG = SweepConfig(q_ladder=(4, 8, 16, 32), modes=("fd-cfl", "pvq-cfl"))


def test_sweep_rows_and_csv(tiny_corpus, tmp_path):
    result = rd_sweep(tiny_corpus, CFG)
    # images x modes x steps x planes x metrics
    assert len(result.rows) == 2 * 2 * 4 * 2 * 2
    assert not result.errors
    out = tmp_path / "rd.csv"
    write_csv(result.rows, out)
    back = read_csv(out)
    assert [r.rate_bits for r in back] == [r.rate_bits for r in result.rows]
    assert [r.value for r in back] == pytest.approx([r.value for r in result.rows], abs=1e-9)
    assert rows_to_csv(back) == out.read_text()


def test_sweep_skips_unreadable_images(tiny_corpus):
    (tiny_corpus / "broken.ppm").write_bytes(b"P6\n4 4\n255\n")
    result = rd_sweep(tiny_corpus, CFG)
    assert set(result.errors) == {"broken.ppm"}
    assert {r.image for r in result.rows} == {"a.ppm", "b.ppm"}


def test_sweep_is_deterministic_across_workers(tiny_corpus):
    one = rows_to_csv(rd_sweep(tiny_corpus, CFG, jobs=1).rows)
    assert rows_to_csv(rd_sweep(tiny_corpus, CFG, jobs=3).rows) == one
    assert rows_to_csv(rd_sweep(tiny_corpus, CFG, jobs=1).rows) == one


def synthetic_rows():
    rows = []
    for img, bias in (("x", 0.0), ("y", 2.0)):
        for mode, gain in (("fd-cfl", 0.0), ("pvq-cfl", 0.3)):
            for i, q in enumerate((4.0, 8.0, 16.0, 32.0)):
                for plane in ("cb", "cr"):
                    rows.append(Row(img, mode, q, plane, "psnr", 1000 * (4 - i) + 100, 30 - 2 * i + bias + gain))
    return rows


def test_corpus_curves_sum_rates_and_average_quality():
    curves = corpus_curves(synthetic_rows())
    pts = curves["pvq-cfl", "cb", "psnr"]
    pts = sorted(pts, key=lambda p: p.rate_bits)
    assert [p.rate_bits for p in pts] == [2 * 1100, 2 * 2100, 2 * 3100, 2 * 4100]
    assert [p.value for p in pts] == pytest.approx([31.3 - 6, 31.3 - 4, 31.3 - 2, 31.3])


def test_incomplete_images_are_excluded():
    rows = [r for r in synthetic_rows() if not (r.image == "y" and r.q_gain == 4.0)]
    pts = corpus_curves(rows)["fd-cfl", "cb", "psnr"]
    assert sorted(p.rate_bits for p in pts) == [1100, 2100, 3100, 4100]


def test_bd_table_and_report():
    table = bd_table(synthetic_rows(), "fd-cfl", "pvq-cfl")
    assert table["psnr", "cb"].delta_snr_db == pytest.approx(0.3, abs=1e-6)
    assert table["ssim", "cb"] is None
    text = format_report(table, "fd-cfl", "pvq-cfl")
    assert "n/a" in text and "0.3" in text


def test_op_counters():
    c = op_counters(8)
    assert (c["fd_fit"]["mults"], c["fd_fit"]["adds"]) == (29, 53)
    assert (c["tf_merge_lf"]["adds"], c["tf_merge_lf"]["shifts"]) == (48, 16)
    assert (c["tf_merge_full"]["adds"], c["tf_merge_full"]["shifts"]) == (128, 64)
