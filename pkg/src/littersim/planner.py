"""Grid planning: A* paths, greedy visit ordering, and standoff goal selection.

All planning runs over an OccupancyGrid that the caller has already
inflated by the robot radius; only Free cells are traversable (Unknown is
as solid as Occupied here).  Moves are 8-connected with straight steps
costing one resolution and diagonal steps sqrt(2) resolutions.

Cost comparisons snap to 1e-9: costs are float sums of {res, sqrt(2)*res}
accumulated in different orders by different routines, so exact equality is
meaningless but anything closer than the snap is a tie, resolved toward the
earlier candidate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .geometry import GroundPoint, Pose2D
from .gridmap import FREE, OccupancyGrid, trace_cells

SQRT2 = math.sqrt(2.0)
COST_TIE = 1e-9


class StartOccupied(ValueError):
    """Plan requested from a cell that is not Free (or is off the grid)."""


@dataclass(frozen=True)
class PathPlan:
    """A* result: cell-center waypoints from start to goal and the path cost
    in meters."""

    waypoints: list[GroundPoint]
    cost: float


@dataclass(frozen=True)
class NavGoal:
    """Where to drive and what the drive is for: a standoff pose facing the
    trash point it serves."""

    pose: Pose2D
    target: GroundPoint


_OFFSETS = (
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, SQRT2),
    (1, -1, SQRT2),
    (-1, 1, SQRT2),
    (-1, -1, SQRT2),
)


def astar(grid: OccupancyGrid, start: GroundPoint, goal: GroundPoint) -> PathPlan | None:
    """Shortest 8-connected path between the cells holding start and goal.

    Returns None when the goal cell is blocked or unreachable.  The octile
    heuristic is admissible and consistent for these step costs, so the
    returned cost is the true minimum.

    Raises:
        StartOccupied: when the start cell is off-grid or not Free.
    """
    s = grid.world_to_cell(start.x, start.y)
    if s is None or grid.cells[s[1], s[0]] != FREE:
        raise StartOccupied(f"start {(start.x, start.y)} is not on a Free cell")
    g = grid.world_to_cell(goal.x, goal.y)
    if g is None or grid.cells[g[1], g[0]] != FREE:
        return None
    res = grid.resolution
    W, H = grid.width, grid.height
    free = grid.cells == FREE

    def heuristic(col: int, row: int) -> float:
        dx = abs(col - g[0])
        dy = abs(row - g[1])
        return res * (max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy))

    start_idx = s[1] * W + s[0]
    goal_idx = g[1] * W + g[0]
    g_cost = {start_idx: 0.0}
    came: dict[int, int] = {}
    heap: list[tuple[float, int, int]] = [(heuristic(s[0], s[1]), 0, start_idx)]
    tie = 1
    closed = set()
    while heap:
        f, _, idx = heapq.heappop(heap)
        if idx in closed:
            continue
        if idx == goal_idx:
            break
        closed.add(idx)
        row, col = divmod(idx, W)
        base = g_cost[idx]
        for dc, dr, step in _OFFSETS:
            nc, nr = col + dc, row + dr
            if not (0 <= nc < W and 0 <= nr < H) or not free[nr, nc]:
                continue
            nidx = nr * W + nc
            cand = base + step * res
            if cand < g_cost.get(nidx, math.inf):
                g_cost[nidx] = cand
                came[nidx] = idx
                heapq.heappush(heap, (cand + heuristic(nc, nr), tie, nidx))
                tie += 1
    if goal_idx not in g_cost:
        return None
    cells = [goal_idx]
    while cells[-1] != start_idx:
        cells.append(came[cells[-1]])
    cells.reverse()
    waypoints = [GroundPoint(*grid.cell_center(i % W, i // W)) for i in cells]
    return PathPlan(waypoints, g_cost[goal_idx])


class CostField:
    """Single-source shortest-path costs over a fixed grid.

    Builds the 8-connected free-cell graph once and answers full cost
    fields per start cell; the costs agree with `astar` (same graph, same
    weights).  Used where a routine needs distances to many targets at
    once, which per-target A* would repeat needlessly.
    """

    def __init__(self, grid: OccupancyGrid):
        self.grid = grid
        W, H = grid.width, grid.height
        free = (grid.cells == FREE).ravel()
        rows = []
        cols = []
        data = []
        idx = np.arange(W * H)
        cgrid = idx % W
        rgrid = idx // W
        for dc, dr, step in _OFFSETS:
            nc = cgrid + dc
            nr = rgrid + dr
            ok = (nc >= 0) & (nc < W) & (nr >= 0) & (nr < H)
            nidx = nr * W + nc
            ok &= free & free[np.where(ok, nidx, 0)]
            rows.append(idx[ok])
            cols.append(nidx[ok])
            data.append(np.full(int(ok.sum()), step * grid.resolution))
        n = W * H
        self._graph = csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )

    def field(self, start: GroundPoint) -> np.ndarray:
        """Cost (meters) from start's cell to every cell, inf if unreachable.

        Raises:
            StartOccupied: when the start cell is off-grid or not Free.
        """
        s = self.grid.world_to_cell(start.x, start.y)
        if s is None or self.grid.cells[s[1], s[0]] != FREE:
            raise StartOccupied(f"start {(start.x, start.y)} is not on a Free cell")
        costs = _csgraph_dijkstra(self._graph, indices=s[1] * self.grid.width + s[0])
        return costs.reshape((self.grid.height, self.grid.width))


def order_waypoints(
    start: GroundPoint, trash: list[GroundPoint], grid: OccupancyGrid
) -> list[tuple[GroundPoint, bool]]:
    """Greedy nearest-first visit order by path cost.

    From the current position, repeatedly pick the unvisited point with the
    cheapest path cost (ties toward earlier input order).  Points whose
    cells are unreachable are flagged False and placed last, keeping their
    input order.  Output length always equals the input length.
    """
    if not trash:
        return []
    cf = CostField(grid)
    remaining = list(enumerate(trash))
    current = start
    ordered: list[tuple[GroundPoint, bool]] = []
    while remaining:
        costs = cf.field(current)
        best_j = -1
        best_cost = math.inf
        for j, (_, p) in enumerate(remaining):
            cell = grid.world_to_cell(p.x, p.y)
            c = math.inf if cell is None else float(costs[cell[1], cell[0]])
            if c < best_cost - COST_TIE:
                best_cost = c
                best_j = j
        if best_j < 0:
            break
        _, chosen = remaining.pop(best_j)
        ordered.append((chosen, True))
        current = chosen
    ordered.extend((p, False) for _, p in remaining)
    return ordered


def approach_goal(
    trash: GroundPoint,
    grid: OccupancyGrid,
    robot: GroundPoint,
    standoff: float = 2.0,
    min_dist: float = 0.0,
    cost_field: CostField | None = None,
) -> NavGoal | None:
    """Cheapest Free cell within standoff of the trash that can see it.

    Candidates are Free cells whose center lies between `min_dist` and
    `standoff` meters of the trash point and whose straight line to the
    trash crosses only Free cells (the trash cell itself is exempt; it may
    sit inside an inflation collar).  Among candidates the one with minimal
    path cost from the robot wins, ties toward lower (row, col).  The goal
    heading faces the trash.  Returns None when no candidate is reachable.
    min_dist keeps the goal out of the camera's near-clip zone; callers
    that only need line of sight can leave it at zero.

    Raises:
        StartOccupied: when the robot cell is off-grid or not Free.
    """
    cf = cost_field if cost_field is not None else CostField(grid)
    costs = cf.field(robot)
    res = grid.resolution
    tcell = grid.world_to_cell(trash.x, trash.y)
    # candidates live in a small box around the trash; index math over that
    # window beats allocating whole-grid masks per call
    rad_cells = int(math.ceil(standoff / res)) + 1
    if tcell is not None:
        c0 = max(0, tcell[0] - rad_cells)
        c1 = min(grid.width - 1, tcell[0] + rad_cells)
        r0 = max(0, tcell[1] - rad_cells)
        r1 = min(grid.height - 1, tcell[1] + rad_cells)
    else:
        c0, c1, r0, r1 = 0, grid.width - 1, 0, grid.height - 1
    best: tuple[int, int] | None = None
    best_cost = math.inf
    for row in range(r0, r1 + 1):
        for col in range(c0, c1 + 1):
            if grid.cells[row, col] != FREE:
                continue
            cx, cy = grid.cell_center(col, row)
            d = math.hypot(cx - trash.x, cy - trash.y)
            if d > standoff or d < min_dist:
                continue
            c = float(costs[row, col])
            if not (c < best_cost - COST_TIE):
                continue
            if not _line_of_sight(grid, cx, cy, trash, tcell):
                continue
            best = (col, row)
            best_cost = c
    if best is None:
        return None
    bx, by = grid.cell_center(best[0], best[1])
    heading = math.atan2(trash.y - by, trash.x - bx)
    return NavGoal(Pose2D(bx, by, heading), trash)


def _line_of_sight(
    grid: OccupancyGrid,
    x: float,
    y: float,
    trash: GroundPoint,
    tcell: tuple[int, int] | None,
) -> bool:
    cells = trace_cells(grid, x, y, trash.x, trash.y)
    start = grid.world_to_cell(x, y)
    for cell in cells:
        if cell == start or cell == tcell:
            continue
        if grid.cells[cell[1], cell[0]] != FREE:
            return False
    return True
