import math

import numpy as np
import pytest

from littersim.geometry import Pose2D
from littersim.gridmap import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    FormatError,
    OccupancyGrid,
    StructuringElement,
    close_occupied,
    inflate,
    integrate_scan,
    load_map,
    morph_close_open,
    open_occupied,
    save_map,
    trace_cells,
)


def brute_dilate(mask, k):
    """Set-based Minkowski dilation with a (2k+1)^2 square, bounds checked
    by hand.  Out-of-array counts as empty."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            out[max(0, r - k):min(h, r + k + 1), max(0, c - k):min(w, c + k + 1)] = True
    return out


def brute_erode(mask, k):
    h, w = mask.shape
    out = np.zeros_like(mask)
    for r in range(h):
        for c in range(w):
            ok = True
            for dr in range(-k, k + 1):
                for dc in range(-k, k + 1):
                    rr, cc = r + dr, c + dc
                    if rr < 0 or rr >= h or cc < 0 or cc >= w or not mask[rr, cc]:
                        ok = False
                        break
                if not ok:
                    break
            out[r, c] = ok
    return out


def grid_from(cells):
    arr = np.asarray(cells, dtype=np.uint8)
    g = OccupancyGrid(arr.shape[1], arr.shape[0], 0.05, Pose2D(0.0, 0.0, 0.0))
    g.cells = arr.copy()
    return g


def test_trace_cells_axis_aligned_and_diagonal():
    g = OccupancyGrid(10, 10, 1.0, Pose2D(0.0, 0.0, 0.0))
    # straight along +x through cell centers
    cells = trace_cells(g, 0.5, 0.5, 4.5, 0.5)
    assert cells == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]
    # perfect diagonal through corners: grazing neighbors are not collected
    cells = trace_cells(g, 0.0, 0.0, 3.0, 3.0)
    assert cells == [(0, 0), (1, 1), (2, 2)]


def _overlap_interval(x0, y0, x1, y1, col, row, res):
    """Parameter interval [t0, t1] where the segment lies inside the closed
    rectangle of cell (col, row), via slab clipping.  Empty -> t0 > t1."""
    t0, t1 = 0.0, 1.0
    dx, dy = x1 - x0, y1 - y0
    for p, q in ((-dx, x0 - col * res), (dx, (col + 1) * res - x0),
                 (-dy, y0 - row * res), (dy, (row + 1) * res - y0)):
        if p == 0.0:
            if q < 0.0:
                return 1.0, 0.0
            continue
        r = q / p
        if p < 0.0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
    return t0, t1


def test_trace_cells_matches_analytic_overlap():
    rng = np.random.default_rng(5)
    res = 0.1
    g = OccupancyGrid(30, 30, res, Pose2D(0.0, 0.0, 0.0))
    for _ in range(100):
        x0, y0, x1, y1 = rng.uniform(0.05, 2.95, size=4)
        got = trace_cells(g, x0, y0, x1, y1)
        assert len(got) == len(set(got))
        # every reported cell is genuinely crossed, and in traversal order
        mids = []
        for col, row in got:
            t0, t1 = _overlap_interval(x0, y0, x1, y1, col, row, res)
            assert t1 - t0 > 1e-13
            mids.append(0.5 * (t0 + t1))
        assert mids == sorted(mids)
        # every robustly crossed cell is reported (grazes may be dropped)
        lo_c = int(min(x0, x1) / res) - 1
        hi_c = int(max(x0, x1) / res) + 1
        lo_r = int(min(y0, y1) / res) - 1
        hi_r = int(max(y0, y1) / res) + 1
        for col in range(max(0, lo_c), min(30, hi_c + 1)):
            for row in range(max(0, lo_r), min(30, hi_r + 1)):
                t0, t1 = _overlap_interval(x0, y0, x1, y1, col, row, res)
                if t1 - t0 > 1e-9:
                    assert (col, row) in got


def test_integrate_scan_worked_example():
    # range 1.0 at resolution 0.05: 19 Free cells then 1 Occupied
    g = OccupancyGrid(40, 40, 0.05, Pose2D(0.0, 0.0, 0.0))
    robot = Pose2D(0.025, 0.025, 0.0)
    integrate_scan(g, robot, [(0.0, 1.0, 3.5)])
    row = g.cells[0]
    assert (row[1:20] == FREE).all()
    assert row[20] == OCCUPIED
    assert row[0] == UNKNOWN  # robot's own cell untouched
    assert (row[21:] == UNKNOWN).all()


def test_integrate_scan_max_range_marks_free_only():
    g = OccupancyGrid(40, 40, 0.05, Pose2D(0.0, 0.0, 0.0))
    robot = Pose2D(0.025, 0.025, 0.0)
    integrate_scan(g, robot, [(0.0, 1.0, 1.0)])
    row = g.cells[0]
    assert (row[1:21] == FREE).all()
    assert not (row == OCCUPIED).any()


def test_integrate_scan_never_demotes_occupied():
    g = OccupancyGrid(40, 40, 0.05, Pose2D(0.0, 0.0, 0.0))
    robot = Pose2D(0.025, 0.025, 0.0)
    integrate_scan(g, robot, [(0.0, 0.5, 3.5)])
    hit = g.cells[0, 10]
    assert hit == OCCUPIED
    # a longer ray through the same cell leaves the hit in place
    integrate_scan(g, robot, [(0.0, 1.5, 3.5)])
    assert g.cells[0, 10] == OCCUPIED


def test_morphology_stages_match_brute_force():
    rng = np.random.default_rng(11)
    se = StructuringElement(3)
    for _ in range(25):
        mask = rng.uniform(size=(20, 20)) < 0.3
        assert (close_occupied(mask, se) == brute_erode(brute_dilate(mask, 1), 1)).all()
        assert (open_occupied(mask, se) == brute_dilate(brute_erode(mask, 1), 1)).all()


def test_morphology_stage_idempotence():
    rng = np.random.default_rng(13)
    se = StructuringElement(3)
    for _ in range(25):
        mask = rng.uniform(size=(24, 24)) < 0.35
        closed = close_occupied(mask, se)
        assert (close_occupied(closed, se) == closed).all()
        opened = open_occupied(mask, se)
        assert (open_occupied(opened, se) == opened).all()


def test_morph_close_open_unknown_semantics():
    # an obstacle face one cell thick, backed by the unknown interior of the
    # obstacle, survives the opening stage; an isolated speckle dies
    cells = np.full((15, 15), FREE, dtype=np.uint8)
    cells[4:11, 4:11] = UNKNOWN  # unscanned interior
    cells[4, 4:11] = OCCUPIED  # scanned faces
    cells[10, 4:11] = OCCUPIED
    cells[4:11, 4] = OCCUPIED
    cells[4:11, 10] = OCCUPIED
    cells[1, 1] = OCCUPIED  # lone speck in the open
    g = grid_from(cells)
    out = morph_close_open(g)
    assert (out.cells[4, 4:11] == OCCUPIED).all()
    assert (out.cells[10, 4:11] == OCCUPIED).all()
    assert (out.cells[4:11, 4] == OCCUPIED).all()
    assert (out.cells[4:11, 10] == OCCUPIED).all()
    # interior stays unknown where the transform kept it
    assert (out.cells[5:10, 5:10] == UNKNOWN).all()
    assert out.cells[1, 1] == FREE
    # every other cell is free
    assert (out.cells[12:, :] == FREE).all()
    assert (out.cells[:, 12:] == FREE).all()
    # input grid untouched
    assert g.cells[1, 1] == OCCUPIED


def test_morph_close_open_edge_band_erodes():
    # erosion treats out-of-array as empty, so solid mass flush against the
    # grid border loses its outermost ring and a thin band there washes out
    cells = np.full((9, 9), FREE, dtype=np.uint8)
    cells[:, 6] = OCCUPIED
    cells[:, 7:] = UNKNOWN
    g = grid_from(cells)
    out = morph_close_open(g)
    assert (out.cells == FREE).all()


def test_inflate_disc_oracle():
    cells = np.full((21, 21), FREE, dtype=np.uint8)
    cells[10, 10] = OCCUPIED
    cells[0, 0] = UNKNOWN
    g = grid_from(cells)
    out = inflate(g, 0.2)  # 4 cells at 0.05 resolution
    for r in range(21):
        for c in range(21):
            d = math.hypot(r - 10, c - 10)
            if (r, c) == (0, 0):
                assert out.cells[r, c] == UNKNOWN
            elif d <= 4.0 + 1e-9:
                assert out.cells[r, c] == OCCUPIED
            else:
                assert out.cells[r, c] == FREE


def test_inflate_zero_radius_is_copy():
    cells = np.full((5, 5), FREE, dtype=np.uint8)
    cells[2, 2] = OCCUPIED
    g = grid_from(cells)
    out = inflate(g, 0.0)
    assert out == g and out is not g
    with pytest.raises(ValueError):
        inflate(g, -0.1)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(17)
    g = OccupancyGrid(33, 21, 0.05, Pose2D(1.0, -2.0, 0.25))
    g.cells = rng.choice(
        np.array([FREE, OCCUPIED, UNKNOWN], dtype=np.uint8), size=(21, 33)
    )
    path = tmp_path / "m.grid"
    save_map(g, str(path))
    back = load_map(str(path))
    assert back == g
    # byte-stable: saving the loaded grid reproduces the file exactly
    path2 = tmp_path / "m2.grid"
    save_map(back, str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_load_map_format_errors(tmp_path):
    p = tmp_path / "bad.grid"
    p.write_bytes(b"NOTAMAP v9 1 1 0.05 0 0 0\n\x00")
    with pytest.raises(FormatError):
        load_map(str(p))
    p.write_bytes(b"GRIDMAP v1 2 2 0.05 0 0 0\n\x00\x00\x00")  # payload short
    with pytest.raises(FormatError):
        load_map(str(p))
    p.write_bytes(b"GRIDMAP v1 2 2 0.05 0 0 0\n" + bytes([FREE, OCCUPIED, UNKNOWN, 99]))
    with pytest.raises(FormatError):
        load_map(str(p))


def test_structuring_element_validation():
    with pytest.raises(ValueError):
        StructuringElement(2)
    with pytest.raises(ValueError):
        StructuringElement(-1)
