"""Tri-state occupancy grid: ray integration, cleanup morphology, inflation, file I/O.

Cells are one of Free, Occupied, Unknown and are stored in a dense uint8
array indexed [row, col], row-major, with cell (col=0, row=0) at the grid
origin corner.  The origin pose places that corner in the map frame and may
be rotated.

File format (see save_map/load_map): a single ASCII header line

    GRIDMAP v1 <width> <height> <resolution> <origin_x> <origin_y> <origin_theta>\n

followed by exactly width*height raw cell bytes, row 0 first.  Byte values
are 0 = Occupied, 254 = Free, 205 = Unknown, chosen so dumped maps open in
common PGM viewers with the usual shading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import Pose2D

FREE = np.uint8(254)
OCCUPIED = np.uint8(0)
UNKNOWN = np.uint8(205)

_MAGIC = b"GRIDMAP v1"


class FormatError(ValueError):
    """Malformed map file; message carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class StructuringElement:
    """Square morphology element of odd size, size=3 meaning 3x3."""

    size: int = 3

    def __post_init__(self) -> None:
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError("structuring element size must be odd and >= 1")

    def footprint(self) -> np.ndarray:
        return np.ones((self.size, self.size), dtype=bool)


class OccupancyGrid:
    """Dense tri-state grid over a rotated rectangle of the map frame."""

    def __init__(self, width: int, height: int, resolution: float, origin: Pose2D):
        if width <= 0 or height <= 0:
            raise ValueError("grid dimensions must be positive")
        if resolution <= 0.0:
            raise ValueError("resolution must be positive")
        self.width = width
        self.height = height
        self.resolution = resolution
        self.origin = origin
        self.cells = np.full((height, width), UNKNOWN, dtype=np.uint8)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.resolution == other.resolution
            and self.origin == other.origin
            and bool(np.array_equal(self.cells, other.cells))
        )

    def copy(self) -> "OccupancyGrid":
        g = OccupancyGrid(self.width, self.height, self.resolution, self.origin)
        g.cells = self.cells.copy()
        return g

    def world_to_cell(self, x: float, y: float) -> tuple[int, int] | None:
        """Map-frame point to (col, row), or None when outside the grid."""
        c = math.cos(self.origin.theta)
        s = math.sin(self.origin.theta)
        dx = x - self.origin.x
        dy = y - self.origin.y
        # rotate into the grid frame
        gx = c * dx + s * dy
        gy = -s * dx + c * dy
        col = math.floor(gx / self.resolution)
        row = math.floor(gy / self.resolution)
        if 0 <= col < self.width and 0 <= row < self.height:
            return col, row
        return None

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        """Map-frame coordinates of a cell center."""
        gx = (col + 0.5) * self.resolution
        gy = (row + 0.5) * self.resolution
        c = math.cos(self.origin.theta)
        s = math.sin(self.origin.theta)
        return self.origin.x + c * gx - s * gy, self.origin.y + s * gx + c * gy


def trace_cells(
    grid: OccupancyGrid, x0: float, y0: float, x1: float, y1: float
) -> list[tuple[int, int]]:
    """Cells crossed by the segment (x0,y0)->(x1,y1), in traversal order.

    Exact grid-line-crossing walk: the segment is cut at every gridline it
    crosses and each interval midpoint names one cell.  Zero-length
    intervals from corner touches are dropped, so a segment through a cell
    corner does not pick up the diagonal neighbors it only grazes.  Cells
    outside the grid bounds are omitted; consecutive duplicates collapse.
    """
    c = math.cos(grid.origin.theta)
    s = math.sin(grid.origin.theta)
    res = grid.resolution

    def to_grid(x: float, y: float) -> tuple[float, float]:
        dx, dy = x - grid.origin.x, y - grid.origin.y
        return (c * dx + s * dy) / res, (-s * dx + c * dy) / res

    ax, ay = to_grid(x0, y0)
    bx, by = to_grid(x1, y1)
    dx = bx - ax
    dy = by - ay
    ts = [0.0, 1.0]
    if abs(dx) > 1e-15:
        k0 = math.ceil(min(ax, bx))
        k1 = math.floor(max(ax, bx))
        for k in range(k0, k1 + 1):
            ts.append((k - ax) / dx)
    if abs(dy) > 1e-15:
        k0 = math.ceil(min(ay, by))
        k1 = math.floor(max(ay, by))
        for k in range(k0, k1 + 1):
            ts.append((k - ay) / dy)
    ts = sorted(t for t in ts if 0.0 <= t <= 1.0)
    out: list[tuple[int, int]] = []
    for i in range(len(ts) - 1):
        if ts[i + 1] - ts[i] <= 1e-12:
            continue
        tm = 0.5 * (ts[i] + ts[i + 1])
        col = math.floor(ax + tm * dx)
        row = math.floor(ay + tm * dy)
        if 0 <= col < grid.width and 0 <= row < grid.height:
            cell = (col, row)
            if not out or out[-1] != cell:
                out.append(cell)
    return out


def integrate_scan(
    grid: OccupancyGrid,
    robot: Pose2D,
    scan: list[tuple[float, float, float]],
) -> None:
    """Fold one range scan into the grid.

    Each scan entry is (bearing, range, max_range), bearing relative to the
    robot heading.  Cells strictly between the robot cell and the hit cell
    become Free; the hit cell becomes Occupied.  Rays that reach max_range
    mark free space only (every traversed cell after the robot cell, no
    Occupied write).  Occupied is never demoted to Free.
    """
    for bearing, rng, max_range in scan:
        hit = rng < max_range
        reach = min(rng, max_range)
        ang = robot.theta + bearing
        ex = robot.x + reach * math.cos(ang)
        ey = robot.y + reach * math.sin(ang)
        cells = trace_cells(grid, robot.x, robot.y, ex, ey)
        if not cells:
            continue
        start = grid.world_to_cell(robot.x, robot.y)
        if cells and cells[0] == start:
            cells = cells[1:]
        if not cells:
            continue
        if hit:
            free_cells, hit_cell = cells[:-1], cells[-1]
            # the endpoint cell may have been clipped at the grid edge; only
            # mark Occupied when the hit point itself maps into the grid
            end_cell = grid.world_to_cell(ex, ey)
            if end_cell is not None and end_cell == hit_cell:
                grid.cells[hit_cell[1], hit_cell[0]] = OCCUPIED
            else:
                free_cells = cells
        else:
            free_cells = cells
        for col, row in free_cells:
            if grid.cells[row, col] != OCCUPIED:
                grid.cells[row, col] = FREE


def close_occupied(mask: np.ndarray, se: StructuringElement) -> np.ndarray:
    """Morphological closing (dilate, then erode) of a boolean mask.

    Out-of-array cells count as empty for both passes.
    """
    fp = se.footprint()
    return ndimage.binary_erosion(ndimage.binary_dilation(mask, fp), fp)


def open_occupied(mask: np.ndarray, se: StructuringElement) -> np.ndarray:
    """Morphological opening (erode, then dilate) of a boolean mask."""
    fp = se.footprint()
    return ndimage.binary_dilation(ndimage.binary_erosion(mask, fp), fp)


def morph_close_open(grid: OccupancyGrid, se: StructuringElement = StructuringElement()) -> OccupancyGrid:
    """Cleanup pass: closing then opening of the occupied set.

    Unknown cells take part in the transform as if Occupied, which is what
    keeps one-cell-thick walls alive through the opening stage: the
    unexplored mass behind a wall backs it during erosion.  Afterwards,
    originally-Unknown cells are restored to Unknown wherever the transform
    output still covers them and become Free where it does not; every other
    cell is Occupied where covered, Free elsewhere.

    Returns a new grid; the input is untouched.
    """
    out = grid.copy()
    solid = grid.cells != FREE
    kept = open_occupied(close_occupied(solid, se), se)
    unknown = grid.cells == UNKNOWN
    out.cells = np.where(
        kept, np.where(unknown, UNKNOWN, OCCUPIED), FREE
    ).astype(np.uint8)
    return out


def inflate(grid: OccupancyGrid, radius: float) -> OccupancyGrid:
    """Grow Occupied by a Euclidean radius (meters) over Free cells.

    Every Free cell whose center lies within `radius` of an Occupied cell
    center becomes Occupied.  Unknown cells are untouched (they are already
    untraversable for planning).  radius 0 returns an identical copy.
    """
    if radius < 0.0:
        raise ValueError("inflation radius must be non-negative")
    out = grid.copy()
    if radius == 0.0 or not (grid.cells == OCCUPIED).any():
        return out
    dist = ndimage.distance_transform_edt(grid.cells != OCCUPIED)
    within = dist <= (radius / grid.resolution) + 1e-9
    out.cells[within & (grid.cells == FREE)] = OCCUPIED
    return out


def save_map(grid: OccupancyGrid, path: str) -> None:
    """Write the grid in the GRIDMAP v1 format.  Round-trips bit-exactly."""
    header = (
        f"GRIDMAP v1 {grid.width} {grid.height} {grid.resolution!r} "
        f"{grid.origin.x!r} {grid.origin.y!r} {grid.origin.theta!r}\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(grid.cells.tobytes())


def load_map(path: str) -> OccupancyGrid:
    """Read a GRIDMAP v1 file.

    Raises:
        FormatError: on a bad magic string, malformed header fields, bad
            cell byte values, or a payload size mismatch.
        OSError: propagated for I/O failures.
    """
    with open(path, "rb") as f:
        data = f.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError("missing header line", 0)
    header = data[: nl]
    if not header.startswith(_MAGIC + b" "):
        raise FormatError("bad magic, expected 'GRIDMAP v1'", 0)
    fields = header[len(_MAGIC) + 1 :].split(b" ")
    if len(fields) != 6:
        raise FormatError(f"expected 6 header fields, got {len(fields)}", len(_MAGIC) + 1)
    try:
        width = int(fields[0])
        height = int(fields[1])
    except ValueError:
        raise FormatError("non-integer grid dimensions", len(_MAGIC) + 1) from None
    try:
        resolution = float(fields[2])
        ox = float(fields[3])
        oy = float(fields[4])
        otheta = float(fields[5])
    except ValueError:
        raise FormatError("non-numeric header fields", len(_MAGIC) + 1) from None
    if width <= 0 or height <= 0 or resolution <= 0.0:
        raise FormatError("non-positive dimensions or resolution", len(_MAGIC) + 1)
    payload = data[nl + 1 :]
    if len(payload) != width * height:
        raise FormatError(
            f"payload holds {len(payload)} bytes, expected {width * height}", nl + 1
        )
    cells = np.frombuffer(payload, dtype=np.uint8).reshape((height, width)).copy()
    valid = (cells == FREE) | (cells == OCCUPIED) | (cells == UNKNOWN)
    if not valid.all():
        bad = int(np.argmax(~valid.ravel()))
        raise FormatError(f"invalid cell byte {cells.ravel()[bad]}", nl + 1 + bad)
    grid = OccupancyGrid(width, height, resolution, Pose2D(ox, oy, otheta))
    grid.cells = cells
    return grid
