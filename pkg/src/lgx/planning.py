"""Costmap path planning, waypoint selection and frontier detection."""
from __future__ import annotations

import heapq
import math

import numpy as np

from .perception import CellState, Costmap
from .world import MOVES, SQRT2, Cell, Pose


class PlanningError(RuntimeError):
    pass


def _passable(costmap: Costmap):
    g = costmap.grid
    h, w = g.shape

    def ok(c: Cell) -> bool:
        return 0 <= c[0] < w and 0 <= c[1] < h and g[c[1], c[0]] == CellState.FREE

    return ok


def _steps(cell: Cell, ok):
    x, y = cell
    for dx, dy, cost in MOVES:
        nxt = (x + dx, y + dy)
        if not ok(nxt):
            continue
        if dx and dy and not (ok((x + dx, y)) and ok((x, y + dy))):
            continue
        yield nxt, cost


def distance_field(costmap: Costmap, start: Cell) -> np.ndarray:
    """Dijkstra costs (in cells) from ``start`` over KnownFree cells; inf if unreachable."""
    h, w = costmap.grid.shape
    out = np.full((h, w), np.inf)
    if not _passable(costmap)(start):
        return out
    # flat indices on a grid padded by one blocked cell on each side
    pw = w + 2
    free = np.zeros((h + 2, pw), dtype=bool)
    free[1:-1, 1:-1] = costmap.grid == CellState.FREE
    free = free.ravel().tolist()
    moves = [(dx + dy * pw, cost, dx if dx and dy else 0, dy * pw if dx and dy else 0)
             for dx, dy, cost in MOVES]
    src = (start[1] + 1) * pw + start[0] + 1
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i]:
            continue
        for off, cost, cx, cy in moves:
            j = i + off
            if not free[j] or (cx and not (free[i + cx] and free[i + cy])):
                continue
            nd = d + cost
            if nd < dist.get(j, math.inf):
                dist[j] = nd
                heapq.heappush(heap, (nd, j))
    for i, d in dist.items():
        out[i // pw - 1, i % pw - 1] = d
    return out


def path_length(cells: list[Cell], cell_size: float = 1.0) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(cells, cells[1:]):
        total += SQRT2 if (x0 != x1 and y0 != y1) else 1.0
    return total * cell_size


def plan_path(costmap: Costmap, start: Cell, goal: Cell) -> list[Cell]:
    """A* over KnownFree cells, 8-connected, no corner cutting.

    Unknown cells are not traversable.
    """
    ok = _passable(costmap)
    if not ok(start) or not ok(goal):
        raise PlanningError(f"endpoints must be KnownFree: {start} -> {goal}")

    def h(c: Cell) -> float:
        dx, dy = abs(c[0] - goal[0]), abs(c[1] - goal[1])
        return (dx + dy) + (SQRT2 - 2) * min(dx, dy)

    g = {start: 0.0}
    parent: dict[Cell, Cell] = {}
    heap = [(h(start), 0.0, start)]
    closed = set()
    while heap:
        _, d, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        if cell == goal:
            path = [cell]
            while cell in parent:
                cell = parent[cell]
                path.append(cell)
            return path[::-1]
        closed.add(cell)
        for nxt, cost in _steps(cell, ok):
            nd = d + cost
            if nd < g.get(nxt, math.inf) - 1e-12:
                g[nxt] = nd
                parent[nxt] = cell
                heapq.heappush(heap, (nd + h(nxt), nd, nxt))
    raise PlanningError(f"no path from {start} to {goal}")


def _cell_of(costmap: Costmap, pose: Pose) -> Cell:
    return (int(math.floor(pose.x / costmap.cell_size)), int(math.floor(pose.y / costmap.cell_size)))


def _clip_reach(costmap: Costmap, pose: Pose, heading: float, e_d: float) -> tuple[float, float]:
    """Point ``e_d`` ahead of the pose, pulled back to stay inside the grid."""
    w = costmap.width * costmap.cell_size
    h = costmap.height * costmap.cell_size
    ux, uy = math.cos(math.radians(heading)), math.sin(math.radians(heading))
    s = e_d
    eps = 1e-6
    if ux > 1e-12:
        s = min(s, (w - eps - pose.x) / ux)
    elif ux < -1e-12:
        s = min(s, (pose.x - eps) / -ux)
    if uy > 1e-12:
        s = min(s, (h - eps - pose.y) / uy)
    elif uy < -1e-12:
        s = min(s, (pose.y - eps) / -uy)
    s = max(s, 0.0)
    return pose.x + s * ux, pose.y + s * uy


def waypoint_keys(costmap: Costmap, pose: Pose, heading: float, e_d: float,
                  cells: np.ndarray) -> np.ndarray:
    """Sort keys (ring, angular deviation, x, y) for candidate cells (N x 2)."""
    px, py = _clip_reach(costmap, pose, heading, e_d)
    ideal = (math.floor(px / costmap.cell_size), math.floor(py / costmap.cell_size))
    ring = np.maximum(np.abs(cells[:, 0] - ideal[0]), np.abs(cells[:, 1] - ideal[1]))
    cx = (cells[:, 0] + 0.5) * costmap.cell_size - pose.x
    cy = (cells[:, 1] + 0.5) * costmap.cell_size - pose.y
    bearing = np.degrees(np.arctan2(cy, cx))
    dev = np.abs((bearing - heading + 180.0) % 360.0 - 180.0)
    dev = np.where((cx == 0) & (cy == 0), 180.0, dev)
    return np.stack([ring, np.round(dev, 9), cells[:, 0], cells[:, 1]], axis=1)


def select_waypoint(costmap: Costmap, pose: Pose, heading: float, e_d: float,
                    dist: np.ndarray | None = None) -> Cell:
    """Reachable KnownFree cell closest (by square rings) to the point
    ``e_d`` meters along ``heading``; ties go to the smaller angular
    deviation, then the smaller (x, y)."""
    if dist is None:
        dist = distance_field(costmap, _cell_of(costmap, pose))
    ys, xs = np.nonzero(np.isfinite(dist))
    if len(xs) == 0:
        raise PlanningError("no reachable KnownFree cell")
    cells = np.stack([xs, ys], axis=1)
    keys = waypoint_keys(costmap, pose, heading, e_d, cells)
    order = np.lexsort(keys.T[::-1])
    x, y = cells[order[0]]
    return (int(x), int(y))


def frontier_mask(costmap: Costmap) -> np.ndarray:
    """KnownFree cells with an Unknown 4-neighbour."""
    g = costmap.grid
    unknown = g == CellState.UNKNOWN
    adj = np.zeros_like(unknown)
    adj[1:, :] |= unknown[:-1, :]
    adj[:-1, :] |= unknown[1:, :]
    adj[:, 1:] |= unknown[:, :-1]
    adj[:, :-1] |= unknown[:, 1:]
    return (g == CellState.FREE) & adj


def frontier_cells(costmap: Costmap) -> set[Cell]:
    ys, xs = np.nonzero(frontier_mask(costmap))
    return {(int(x), int(y)) for y, x in zip(ys, xs)}


def fbe_step(costmap: Costmap, pose: Pose, min_cost: float = 0.0,
             dist: np.ndarray | None = None) -> Cell:
    """Nearest reachable frontier by path cost, ties by (x, y).

    Frontiers closer than ``min_cost`` meters are skipped when any farther
    one exists.  With no frontier left, the farthest reachable KnownFree
    cell is returned.
    """
    start = _cell_of(costmap, pose)
    if dist is None:
        dist = distance_field(costmap, start)
    reach = np.isfinite(dist)
    if not reach.any():
        raise PlanningError("pose is not on a reachable KnownFree cell")
    front = frontier_mask(costmap) & reach
    if front.any():
        far_enough = front & (dist * costmap.cell_size >= min_cost)
        pick = far_enough if far_enough.any() else front
        ys, xs = np.nonzero(pick)
        order = np.lexsort((ys, xs, dist[ys, xs]))
        return (int(xs[order[0]]), int(ys[order[0]]))
    ys, xs = np.nonzero(reach)
    order = np.lexsort((ys, xs, -dist[ys, xs]))
    return (int(xs[order[0]]), int(ys[order[0]]))
