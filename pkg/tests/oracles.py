"""Independent reference implementations used only by the tests."""
import math

import numpy as np
from scipy.sparse import lil_matrix
from scipy.sparse.csgraph import dijkstra

MOVES8 = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy]


def grid_graph(passable: np.ndarray):
    """Sparse 8-connected graph over ``passable[y, x]`` without corner cutting."""
    h, w = passable.shape
    g = lil_matrix((h * w, h * w))
    for y in range(h):
        for x in range(w):
            if not passable[y, x]:
                continue
            for dx, dy in MOVES8:
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h) or not passable[ny, nx]:
                    continue
                if dx and dy and not (passable[y, nx] and passable[ny, x]):
                    continue
                g[y * w + x, ny * w + nx] = math.sqrt(2) if dx and dy else 1.0
    return g.tocsr()


def distances_from(passable: np.ndarray, start) -> np.ndarray:
    h, w = passable.shape
    d = dijkstra(grid_graph(passable), indices=start[1] * w + start[0])
    return d.reshape(h, w)


def brute_frontiers(grid: np.ndarray, free=1, unknown=0) -> set:
    h, w = grid.shape
    out = set()
    for y in range(h):
        for x in range(w):
            if grid[y, x] != free:
                continue
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and grid[ny, nx] == unknown:
                    out.add((x, y))
    return out


def spl_reference(rows) -> float:
    """rows: (success, path_length, optimal_length)."""
    total = 0.0
    for s, p, l in rows:
        if s:
            total += 1.0 if max(p, l) == 0 else l / max(p, l)
    return 100.0 * total / len(rows)
