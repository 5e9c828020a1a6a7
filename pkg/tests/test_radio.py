import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavnet.model import Role, SimConfig
from uavnet.radio import (
    GridParseError,
    SnrGrid,
    calibrated_link_budget,
    compute_grid,
    friis_received_power,
    grid_side,
    grid_to_pgm,
    read_grid_csv,
    snr_db,
    snr_to_gray,
    write_grid_csv,
)

from conftest import make_uav

CFG = SimConfig()


def test_friis_identity():
    assert friis_received_power(1.0, 1.0, 1.0) == 1.0


def test_friis_paper_wavelength():
    # 1 / (1e-4 * 4e4)
    assert friis_received_power(1.0, 0.01, 200.0) == pytest.approx(0.25, rel=1e-15)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1.0), st.floats(1e-2, 1e4))
def test_inverse_square(K, lam, d):
    assert friis_received_power(K, lam, 2 * d) == pytest.approx(friis_received_power(K, lam, d) / 4, rel=1e-12)


def test_friis_rejects_zero_distance():
    with pytest.raises(ValueError):
        friis_received_power(1.0, 0.01, 0.0)


def test_calibrated_budget_value():
    # 10^1.5 * (0.01)^2 * (40^2 + 90^2) * 1 W
    assert calibrated_link_budget(CFG) == pytest.approx(31.6227766016838 * 1e-4 * 9700, rel=1e-12)
    assert calibrated_link_budget(CFG) == pytest.approx(30.674, abs=1e-3)


def test_snr_at_service_edge_is_15_db():
    uav = make_uav(1, 0.0, 0.0)
    assert snr_db((40.0, 0.0), [uav], CFG) == pytest.approx(15.0, abs=1e-12)
    assert snr_db((0.0, -40.0), [uav], CFG) == pytest.approx(15.0, abs=1e-12)


def test_snr_peak_directly_below():
    uav = make_uav(1, 10.0, 20.0)
    below = snr_db((10.0, 20.0), [uav], CFG)
    assert below == pytest.approx(15.0 + 10 * math.log10(9700 / 8100))
    assert all(snr_db((10.0 + dx, 20.0), [uav], CFG) < below for dx in (0.5, 5.0, 50.0))


def test_snr_drop_from_r_to_2r():
    uav = make_uav(1, 0.0, 0.0)
    delta = snr_db((40.0, 0.0), [uav], CFG) - snr_db((80.0, 0.0), [uav], CFG)
    assert delta == pytest.approx(10 * math.log10((4 * 1600 + 8100) / (1600 + 8100)))


def test_snr_uncovered():
    root = make_uav(0, 0.0, 0.0, role=Role.ROOT)
    assert snr_db((0.0, 0.0), [root], CFG) == -math.inf
    assert snr_db((0.0, 0.0), [root], CFG.replace(root_in_coverage=True)) > 15


@given(st.floats(0, 500), st.floats(0, 500))
def test_snr_decreasing_in_distance(a, b):
    uav = make_uav(1, 0.0, 0.0)
    lo, hi = sorted((a, b))
    if hi - lo > 1e-6:
        assert snr_db((lo, 0.0), [uav], CFG) > snr_db((hi, 0.0), [uav], CFG)


@given(st.floats(-300, 300), st.floats(-300, 300), st.floats(-300, 300), st.floats(-300, 300))
def test_extra_uav_never_hurts(px, py, ux, uy):
    base = [make_uav(1, 100.0, 0.0)]
    assert snr_db((px, py), base + [make_uav(2, ux, uy)], CFG) >= snr_db((px, py), base, CFG)


def test_grid_shape():
    cfg = SimConfig(grid_step=240.0)
    grid = compute_grid([make_uav(1, 0.0, 0.0)], cfg)
    assert grid.values.shape == (3, 3)
    assert grid_side(240.0, 5.0) == 97
    assert list(grid.coords) == [-240.0, 0.0, 240.0]


def test_grid_symmetry_single_uav_at_origin():
    grid = compute_grid([make_uav(1, 0.0, 0.0)], SimConfig(grid_step=10.0))
    v = grid.values
    assert np.array_equal(v, v[::-1, :])
    assert np.array_equal(v, v[:, ::-1])
    assert np.all(np.isfinite(v))


def test_grid_matches_pointwise():
    uavs = [make_uav(1, 37.0, -12.0), make_uav(2, -150.0, 90.0)]
    grid = compute_grid(uavs, SimConfig(grid_step=60.0))
    for x, y, v in grid.iter_points():
        assert v == pytest.approx(snr_db((x, y), uavs, CFG), abs=1e-9)


def test_grid_without_servers():
    grid = compute_grid([], SimConfig(grid_step=240.0))
    assert np.all(grid.values == -np.inf)


def test_grid_csv_round_trip(tmp_path):
    grid = compute_grid([make_uav(1, 0.0, 0.0)], SimConfig(grid_step=120.0))
    path = tmp_path / "g.csv"
    with open(path, "w", newline="") as fp:
        write_grid_csv(grid, fp)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,snr_db"
    assert lines[1].startswith("-240.000000,-240.000000,")
    assert lines[2].startswith("-120.000000,-240.000000,")  # row-major, x fastest
    back = read_grid_csv(path)
    assert back.values.shape == (5, 5)
    assert np.allclose(back.values, grid.values, atol=1e-6)
    assert back.half_side == 240.0 and back.step == 120.0


def test_gray_mapping():
    assert list(snr_to_gray(np.array([-10.0, 15.0, 40.0, -50.0, 90.0, -np.inf]))) == [0, 128, 255, 0, 255, 0]


def test_pgm_constant_grid():
    pgm = grid_to_pgm(SnrGrid(240.0, 240.0, np.full((3, 3), 15.0)))
    assert pgm == b"P5\n3 3\n255\n" + bytes([128] * 9)


def test_pgm_single_cell():
    assert grid_to_pgm(SnrGrid(0.0, 1.0, np.array([[40.0]]))) == b"P5\n1 1\n255\n\xff"


def test_pgm_top_row_is_max_y():
    values = np.array([[-10.0, -10.0], [40.0, 40.0]])  # second row has larger y
    assert grid_to_pgm(SnrGrid(1.0, 2.0, values)).endswith(bytes([255, 255, 0, 0]))


@pytest.mark.parametrize(
    "body, line",
    [
        ("x,y,snr_db\n0,0,1\n1,0\n", 3),
        ("x,y,snr_db\n0,0,abc\n", 2),
        ("x,y,z\n", 1),
        ("x,y,snr_db\n0,0,1\n1,0,1\n", 3),
    ],
)
def test_malformed_grid_reports_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(GridParseError, match=f"line {line}"):
        read_grid_csv(path)
