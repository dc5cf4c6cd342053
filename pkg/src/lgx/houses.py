"""Procedural houses: a row of rooms either side of a central hallway, and
the fixed two-phase house.

Walls are one cell thick; each room opens onto the hallway through a
one-metre door.  Door cells belong to the hallway and carry a "hallway"
landmark, so the hallway can be offered to the language model as a
destination from inside any room.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import HALLWAY_LABEL, ROOM_TEMPLATES, TWO_PHASE_ROOMS
from .world import HALLWAY, Cell, EpisodeSpec, ObjectInstance, ObjectKind, Room, WorldMap, validate_world

DOOR_WIDTH = 4


@dataclass(frozen=True)
class RoomSlot:
    label: str
    x0: int
    y0: int
    w: int
    h: int
    door_x: int  # leftmost door column
    door_y: int  # wall row holding the door
    side: str    # "top" or "bottom"

    def cells(self) -> list[Cell]:
        return [(x, y) for y in range(self.y0, self.y0 + self.h) for x in range(self.x0, self.x0 + self.w)]


class _Layout:
    def __init__(self, top_widths, bottom_widths, top_depth, bottom_depth, hall_h, labels, door_offsets):
        inner = sum(top_widths) + len(top_widths) - 1
        if inner != sum(bottom_widths) + len(bottom_widths) - 1:
            raise ValueError("top and bottom rows must span the same width")
        self.width = inner + 2
        self.height = 1 + top_depth + 1 + hall_h + 1 + bottom_depth + 1
        self.hall_y0 = top_depth + 2
        self.hall_h = hall_h
        self.obstacles = np.ones((self.height, self.width), dtype=bool)
        self.slots: list[RoomSlot] = []
        it = iter(zip(labels, door_offsets))
        for side, widths, y0, depth, wall_y in (
            ("top", top_widths, 1, top_depth, top_depth + 1),
            ("bottom", bottom_widths, self.hall_y0 + hall_h + 1, bottom_depth, self.hall_y0 + hall_h),
        ):
            x = 1
            for w in widths:
                label, off = next(it)
                self.slots.append(RoomSlot(label, x, y0, w, depth, x + off, wall_y, side))
                x += w + 1
        for s in self.slots:
            self.obstacles[s.y0:s.y0 + s.h, s.x0:s.x0 + s.w] = False
            self.obstacles[s.door_y, s.door_x:s.door_x + DOOR_WIDTH] = False
        self.obstacles[self.hall_y0:self.hall_y0 + hall_h, 1:self.width - 1] = False

    def hallway_cells(self) -> list[Cell]:
        cells = [(x, y) for y in range(self.hall_y0, self.hall_y0 + self.hall_h) for x in range(1, self.width - 1)]
        for s in self.slots:
            cells.extend((s.door_x + i, s.door_y) for i in range(DOOR_WIDTH))
        return cells


def _finish(layout: _Layout, rooms_objects, name: str, episodes) -> tuple[WorldMap, list[EpisodeSpec]]:
    rooms = [Room(f"r{i}", s.label, frozenset(s.cells())) for i, s in enumerate(layout.slots)]
    objects = []
    for i, s in enumerate(layout.slots):
        objects.append(ObjectInstance(f"hallway-{i}", HALLWAY_LABEL, ObjectKind.COMMON,
                                      (s.door_x, s.door_y), (DOOR_WIDTH, 1), HALLWAY))
    for room_id, label, kind, pos, ext in rooms_objects:
        objects.append(ObjectInstance(f"{room_id}-{label.replace(' ', '_')}", label, kind, pos, ext, room_id))
    world = WorldMap(layout.width, layout.height, 0.25, layout.obstacles, rooms,
                     layout.hallway_cells(), objects, name=name)
    validate_world(world, episodes)
    return world, episodes


def two_phase_house(name: str = "two-phase") -> tuple[WorldMap, list[EpisodeSpec]]:
    """Central hall with kitchen (north), living room (east), bedroom
    (south) and office (west), each opening onto the hall.

    Every room holds its two targets in the far corners and its two common
    objects just inside the door, so all four rooms show from the hall.
    Episodes start in every room other than the target's.
    """
    hall, room_d, n = 14, 11, 40
    lo, hi = room_d + 2, room_d + 2 + hall - 1  # hall spans [lo, hi] on both axes
    door0 = lo + (hall - DOOR_WIDTH) // 2
    obstacles = np.ones((n, n), dtype=bool)
    obstacles[lo:hi + 1, lo:hi + 1] = False
    # (x0, y0, w, h, door cells, inward unit step from the door)
    span = range(door0, door0 + DOOR_WIDTH)
    specs = [
        (lo, 1, hall, room_d, [(x, lo - 1) for x in span], (0, -1)),
        (hi + 2, lo, room_d, hall, [(hi + 1, y) for y in span], (1, 0)),
        (lo, hi + 2, hall, room_d, [(x, hi + 1) for x in span], (0, 1)),
        (1, lo, room_d, hall, [(lo - 1, y) for y in span], (-1, 0)),
    ]
    rooms, objects, hall_cells = [], [], [(x, y) for y in range(lo, hi + 1) for x in range(lo, hi + 1)]
    for i, ((label, targets, commons), (x0, y0, w, h, door, step)) in enumerate(zip(TWO_PHASE_ROOMS, specs)):
        rid = f"r{i}"
        cells = [(x, y) for y in range(y0, y0 + h) for x in range(x0, x0 + w)]
        for x, y in cells + door:
            obstacles[y, x] = False
        hall_cells.extend(door)
        rooms.append(Room(rid, label, frozenset(cells)))
        horizontal = step[0] == 0
        objects.append(ObjectInstance(f"hallway-{i}", HALLWAY_LABEL, ObjectKind.COMMON, min(door),
                                      (DOOR_WIDTH, 1) if horizontal else (1, DOOR_WIDTH), HALLWAY))
        inside = [(x + step[0], y + step[1]) for x, y in door]
        for j, c in enumerate(commons):
            pos = min(inside[2 * j:2 * j + 2])
            objects.append(ObjectInstance(f"{rid}-{c}", c, ObjectKind.COMMON, pos,
                                          (2, 1) if horizontal else (1, 2), rid))
        # far corners, two cells off the back wall
        if horizontal:
            yy = y0 + 1 if step[1] < 0 else y0 + h - 2
            corners = [(x0 + 1, yy), (x0 + w - 2, yy)]
        else:
            xx = x0 + 1 if step[0] < 0 else x0 + w - 2
            corners = [(xx, y0 + 1), (xx, y0 + h - 2)]
        for t, c in zip(targets, corners):
            objects.append(ObjectInstance(f"{rid}-{t.replace(' ', '_')}", t, ObjectKind.TARGET, c, (1, 1), rid))
    episodes = []
    for i, (_, targets, _) in enumerate(TWO_PHASE_ROOMS):
        for k, t in enumerate(targets):
            for j in range(len(TWO_PHASE_ROOMS)):
                if j != i:
                    episodes.append(EpisodeSpec(t, 100 * i + 10 * j + k, f"r{j}"))
    world = WorldMap(n, n, 0.25, obstacles, rooms, hall_cells, objects, name=name)
    validate_world(world, episodes)
    return world, episodes


def _split(total: int, n: int, lo: int, rng: np.random.Generator) -> list[int]:
    # n widths >= lo summing (with n-1 separating walls) to total
    free = total - (n - 1) - n * lo
    if free < 0:
        raise ValueError("house too narrow for its rooms")
    cuts = np.sort(rng.integers(0, free + 1, size=n - 1))
    parts = np.diff(np.concatenate([[0], cuts, [free]]))
    return [lo + int(p) for p in parts]


def generate_house(seed: int, name: str | None = None, n_episodes: int = 10,
                   min_room: int = 12, max_room: int = 20) -> tuple[WorldMap, list[EpisodeSpec]]:
    if min_room < DOOR_WIDTH + 6 or max_room < min_room:
        raise ValueError("room size parameters too small to fit a door and furniture")
    rng = np.random.default_rng(seed)
    n_top = int(rng.integers(2, 4))
    n_bottom = int(rng.integers(2, 4))
    labels = [str(l) for l in rng.permutation(sorted(ROOM_TEMPLATES))[: n_top + n_bottom]]
    inner = int(rng.integers(max(n_top, n_bottom) * (min_room + 1), max(n_top, n_bottom) * (max_room + 1)))
    top = _split(inner, n_top, min_room, rng)
    bottom = _split(inner, n_bottom, min_room, rng)
    depth_t = int(rng.integers(min_room, max_room + 1))
    depth_b = int(rng.integers(min_room, max_room + 1))
    hall_h = int(rng.integers(6, 9))
    doors = [int(rng.integers(1, w - DOOR_WIDTH)) for w in top + bottom]
    layout = _Layout(top, bottom, depth_t, depth_b, hall_h, labels, doors)

    objs = []
    targets = []
    for i, s in enumerate(layout.slots):
        rid = f"r{i}"
        spec = ROOM_TEMPLATES[s.label]
        taken: set[Cell] = set()
        commons = list(rng.permutation(spec["common"])[: int(rng.integers(2, 4))])
        for c in commons:
            for _ in range(100):
                x = int(rng.integers(s.x0, s.x0 + s.w - 1))
                y = int(rng.integers(s.y0, s.y0 + s.h - 1))
                cells = {(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)}
                if not cells & taken:
                    taken |= cells
                    objs.append((rid, str(c), ObjectKind.COMMON, (x, y), (2, 2)))
                    break
        t = str(rng.choice(spec["targets"]))
        for _ in range(100):
            cell = (int(rng.integers(s.x0, s.x0 + s.w)), int(rng.integers(s.y0, s.y0 + s.h)))
            if cell not in taken:
                taken.add(cell)
                objs.append((rid, t, ObjectKind.TARGET, cell, (1, 1)))
                targets.append(t)
                break
    episodes = [EpisodeSpec(targets[k % len(targets)], int(rng.integers(2**31))) for k in range(n_episodes)]
    return _finish(layout, objs, name or f"house-{seed}", episodes)


def generate_houses(count: int, seed: int, n_episodes: int = 10, min_room: int = 12,
                    max_room: int = 20) -> list[tuple[WorldMap, list[EpisodeSpec]]]:
    """``count`` houses, deterministic in ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    seeds = np.random.SeedSequence(seed).generate_state(count)
    return [generate_house(int(s), f"house-{seed}-{i:02d}", n_episodes, min_room, max_room)
            for i, s in enumerate(seeds)]
