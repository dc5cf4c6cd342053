import numpy as np
import pytest

from lgx.perception import CellState, Costmap
from lgx.world import EpisodeSpec, ObjectInstance, ObjectKind, Room, WorldMap

ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def walled(width, height, inner_walls=()):
    """Obstacle array with a one-cell border plus extra wall cells."""
    obs = np.zeros((height, width), dtype=bool)
    obs[0, :] = obs[-1, :] = True
    obs[:, 0] = obs[:, -1] = True
    for x, y in inner_walls:
        obs[y, x] = True
    return obs


def one_room(width=12, height=12, objects=(), inner_walls=(), cell_size=0.25, similarity=None):
    """Single walled room ``r0`` covering every interior cell."""
    obs = walled(width, height, inner_walls)
    cells = frozenset((x, y) for y in range(height) for x in range(width) if not obs[y, x])
    room = Room("r0", "kitchen", cells)
    return WorldMap(width, height, cell_size, obs, [room], (), list(objects), similarity, "test")


def obj(oid, label, pos, kind=ObjectKind.COMMON, extent=(1, 1), room="r0"):
    return ObjectInstance(oid, label, kind, pos, extent, room)


def random_costmap(rng: np.random.Generator, n=32, p_obstacle=0.25, p_unknown=0.1) -> Costmap:
    u = rng.random((n, n))
    grid = np.full((n, n), CellState.FREE, dtype=np.int8)
    grid[u < p_obstacle + p_unknown] = CellState.OBSTACLE
    grid[u < p_unknown] = CellState.UNKNOWN
    return Costmap(grid, 0.25)


@pytest.fixture
def kitchen():
    objects = [
        obj("sink", "sink", (3, 3)),
        obj("fridge", "fridge", (8, 3)),
        obj("mug", "cat-shaped mug", (8, 8), ObjectKind.TARGET),
    ]
    return one_room(objects=objects), [EpisodeSpec("cat-shaped mug", 0)]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {name}: {detail}")
