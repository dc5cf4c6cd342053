"""Ground-truth environment: occupancy grid, rooms, objects, spawning and
the exact shortest-path oracle used for SPL.

Coordinates: a cell is ``(x, y)`` = (column, row).  Cell ``(x, y)`` spans
``[x*cs, (x+1)*cs) x [y*cs, (y+1)*cs)`` in meters.  Headings are degrees,
0 along +x and 90 along +y, so turning "right" adds 90.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import numpy as np

Cell = tuple[int, int]

HALLWAY = "hallway"
SQRT2 = math.sqrt(2.0)
# 8-connected moves as (dx, dy, cost in cells)
MOVES = [
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
]


class ScenarioError(ValueError):
    """Raised when a scenario file violates the schema or a map invariant."""


class ObjectKind(str, Enum):
    COMMON = "common"
    TARGET = "target"


@dataclass(frozen=True)
class Room:
    id: str
    label: str
    footprint: frozenset[Cell]


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    label: str
    kind: ObjectKind
    position: Cell
    extent: tuple[int, int] = (1, 1)
    room_id: str | None = None

    @property
    def cells(self) -> list[Cell]:
        x0, y0 = self.position
        w, h = self.extent
        return [(x, y) for y in range(y0, y0 + h) for x in range(x0, x0 + w)]

    @property
    def is_target(self) -> bool:
        return self.kind is ObjectKind.TARGET


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0


@dataclass(frozen=True)
class EpisodeSpec:
    target_label: str
    spawn_seed: int
    spawn_room: str | None = None


class WorldMap:
    """Immutable ground-truth map.

    ``obstacles`` is a bool array indexed ``[y, x]``.
    """

    def __init__(
        self,
        width: int,
        height: int,
        cell_size: float,
        obstacles: np.ndarray,
        rooms: Sequence[Room] = (),
        hallway: Iterable[Cell] = (),
        objects: Sequence[ObjectInstance] = (),
        similarity: dict[tuple[str, str], float] | None = None,
        name: str = "",
    ):
        obstacles = np.array(obstacles, dtype=bool)
        if obstacles.shape != (height, width):
            raise ScenarioError(f"grid: obstacle array shape {obstacles.shape} != ({height}, {width})")
        obstacles.setflags(write=False)
        self.width = int(width)
        self.height = int(height)
        self.cell_size = float(cell_size)
        self.obstacles = obstacles
        self.rooms = tuple(rooms)
        self.hallway = frozenset(hallway)
        self.objects = tuple(objects)
        self.similarity = dict(similarity or {})
        self.name = name
        self._region = {}
        for room in self.rooms:
            for c in room.footprint:
                self._region[c] = room.id
        for c in self.hallway:
            self._region.setdefault(c, HALLWAY)
        self._visibility_cache: dict[tuple[str, float], np.ndarray] = {}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorldMap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.cell_size == other.cell_size
            and np.array_equal(self.obstacles, other.obstacles)
            and self.rooms == other.rooms
            and self.hallway == other.hallway
            and self.objects == other.objects
            and self.similarity == other.similarity
        )

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        return (f"WorldMap({self.name!r}, {self.width}x{self.height}, rooms={len(self.rooms)}, "
                f"objects={len(self.objects)})")

    # -- cell helpers -------------------------------------------------
    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not self.obstacles[cell[1], cell[0]]

    def free_cells(self) -> list[Cell]:
        ys, xs = np.nonzero(~self.obstacles)
        return [(int(x), int(y)) for y, x in zip(ys, xs)]

    def cell_of(self, pose: Pose) -> Cell:
        return (int(math.floor(pose.x / self.cell_size)), int(math.floor(pose.y / self.cell_size)))

    def center(self, cell: Cell) -> tuple[float, float]:
        return ((cell[0] + 0.5) * self.cell_size, (cell[1] + 0.5) * self.cell_size)

    def pose_at(self, cell: Cell, heading: float = 0.0) -> Pose:
        x, y = self.center(cell)
        return Pose(x, y, heading % 360.0)

    def region_of(self, cell: Cell) -> str | None:
        """Room id, ``"hallway"`` or None for cells outside every region."""
        return self._region.get(cell)

    def room(self, room_id: str) -> Room:
        for r in self.rooms:
            if r.id == room_id:
                return r
        raise KeyError(room_id)

    def object(self, object_id: str) -> ObjectInstance:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)

    def target(self, label: str) -> ObjectInstance:
        for o in self.objects:
            if o.is_target and o.label == label:
                return o
        raise KeyError(f"no target object labelled {label!r}")

    def object_cells(self) -> set[Cell]:
        return {c for o in self.objects for c in o.cells}

    # -- visibility ---------------------------------------------------
    def line_of_sight(self, origin: tuple[float, float], cells: np.ndarray) -> np.ndarray:
        """Occlusion test from a metric point to the centers of ``cells`` (N x 2)."""
        cells = np.asarray(cells, dtype=float).reshape(-1, 2)
        if len(cells) == 0:
            return np.zeros(0, dtype=bool)
        targets = (cells + 0.5) * self.cell_size
        return segments_clear(self, np.broadcast_to(np.asarray(origin, float), targets.shape), targets)

    def visible_from(self, pose: Pose, obj: ObjectInstance, max_range: float) -> bool:
        """True if any cell of ``obj`` is within ``max_range`` and unoccluded."""
        cells = np.array(obj.cells, dtype=float)
        centers = (cells + 0.5) * self.cell_size
        d = np.hypot(centers[:, 0] - pose.x, centers[:, 1] - pose.y)
        near = d <= max_range + 1e-9
        if not near.any():
            return False
        return bool(self.line_of_sight((pose.x, pose.y), cells[near]).any())

    def visibility_mask(self, obj: ObjectInstance, max_range: float) -> np.ndarray:
        """Bool ``[y, x]`` mask of Free cells whose center sees ``obj`` within range."""
        key = (obj.id, float(max_range))
        cached = self._visibility_cache.get(key)
        if cached is not None:
            return cached
        mask = np.zeros((self.height, self.width), dtype=bool)
        goal = np.array(obj.cells, dtype=float)
        goal_c = (goal + 0.5) * self.cell_size
        r = int(math.ceil(max_range / self.cell_size)) + 1
        xs = [c[0] for c in obj.cells]
        ys = [c[1] for c in obj.cells]
        cand = [
            (x, y)
            for y in range(max(0, min(ys) - r), min(self.height, max(ys) + r + 1))
            for x in range(max(0, min(xs) - r), min(self.width, max(xs) + r + 1))
            if not self.obstacles[y, x]
        ]
        if cand:
            cand_a = np.array(cand, dtype=float)
            cand_c = (cand_a + 0.5) * self.cell_size
            n, m = len(cand_a), len(goal_c)
            starts = np.repeat(cand_c, m, axis=0)
            ends = np.tile(goal_c, (n, 1))
            d = np.hypot(*(ends - starts).T)
            ok = d <= max_range + 1e-9
            clear = np.zeros(n * m, dtype=bool)
            if ok.any():
                clear[ok] = segments_clear(self, starts[ok], ends[ok])
            seen = clear.reshape(n, m).any(axis=1)
            for (x, y), s in zip(cand, seen):
                mask[y, x] = s
        mask.setflags(write=False)
        self._visibility_cache[key] = mask
        return mask


def sample_step(cell_size: float) -> float:
    return cell_size / 8.0


def segments_clear(world: WorldMap, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Vectorised occlusion test: is every sample along each segment Free?

    Segments are sampled every 1/8 cell from the start; the end point
    itself is included.  Out-of-bounds samples count as blocked.
    """
    starts = np.asarray(starts, float)
    ends = np.asarray(ends, float)
    delta = ends - starts
    length = np.hypot(delta[:, 0], delta[:, 1])
    step = sample_step(world.cell_size)
    n = int(math.ceil(length.max() / step)) + 1 if len(length) else 1
    # fixed metric spacing per segment, so results do not depend on batching
    t = np.minimum(np.arange(n) * step, length[:, None])
    frac = np.divide(t, length[:, None], out=np.zeros_like(t), where=length[:, None] > 0)
    px = starts[:, 0:1] + delta[:, 0:1] * frac
    py = starts[:, 1:2] + delta[:, 1:2] * frac
    ix = np.floor(px / world.cell_size).astype(int)
    iy = np.floor(py / world.cell_size).astype(int)
    inside = (ix >= 0) & (ix < world.width) & (iy >= 0) & (iy < world.height)
    blocked = ~inside
    blocked[inside] = world.obstacles[iy[inside], ix[inside]]
    return ~blocked.any(axis=1)


# -- path lengths -------------------------------------------------------

def _neighbours(world: WorldMap, cell: Cell, passable) -> Iterable[tuple[Cell, float]]:
    x, y = cell
    for dx, dy, cost in MOVES:
        nxt = (x + dx, y + dy)
        if not passable(nxt):
            continue
        # no corner cutting through obstacles
        if dx and dy and not (passable((x + dx, y)) and passable((x, y + dy))):
            continue
        yield nxt, cost


def shortest_path_length(world: WorldMap, start: Pose, goal: ObjectInstance, view_range: float = 5.0) -> float:
    """Exact 8-connected shortest path (meters) from ``start`` to the nearest
    cell from which ``goal`` is visible within ``view_range``."""
    mask = world.visibility_mask(goal, view_range)
    src = world.cell_of(start)
    if not world.is_free(src):
        raise ValueError(f"start {src} is not a Free cell")
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, cell = heapq.heappop(heap)
        if d > dist[cell]:
            continue
        if mask[cell[1], cell[0]]:
            return d * world.cell_size
        for nxt, cost in _neighbours(world, cell, world.is_free):
            nd = d + cost
            if nd < dist.get(nxt, math.inf):
                dist[nxt] = nd
                heapq.heappush(heap, (nd, nxt))
    raise ValueError(f"goal {goal.id!r} unreachable from {src}")


def spawn(world: WorldMap, seed: int, room: str | None = None) -> Pose:
    """Deterministic spawn pose on a Free cell outside every object extent."""
    taken = world.object_cells()
    cells = [c for c in world.free_cells() if c not in taken]
    if room is not None:
        cells = [c for c in cells if world.region_of(c) == room]
    if not cells:
        raise ValueError("no valid spawn cell" + (f" in region {room!r}" if room else ""))
    rng = np.random.default_rng(seed)
    cell = cells[int(rng.integers(len(cells)))]
    heading = float(rng.integers(0, 360))
    return world.pose_at(cell, heading)


# -- scenario files -----------------------------------------------------

_CELL = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}
SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "rooms", "objects", "episodes"],
    "properties": {
        "name": {"type": "string"},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["width", "height", "cell_size", "obstacle_cells"],
            "properties": {
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
                "cell_size": {"type": "number", "exclusiveMinimum": 0},
                "obstacle_cells": {"type": "array", "items": _CELL},
            },
        },
        "rooms": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "label", "cells"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "label": {"type": "string", "minLength": 1},
                    "cells": {"type": "array", "items": _CELL, "minItems": 1},
                },
            },
        },
        "hallway": {"type": "array", "items": _CELL},
        "objects": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "label", "kind", "position"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "label": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["common", "target"]},
                    "position": _CELL,
                    "extent": {"type": "array", "items": {"type": "integer", "minimum": 1},
                               "minItems": 2, "maxItems": 2},
                    "room_id": {"type": ["string", "null"]},
                },
            },
        },
        "similarity": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["phrase", "label", "score"],
                "properties": {
                    "phrase": {"type": "string"},
                    "label": {"type": "string"},
                    "score": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        },
        "episodes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["target_label", "spawn_seed"],
                "properties": {
                    "target_label": {"type": "string", "minLength": 1},
                    "spawn_seed": {"type": "integer"},
                    "spawn_room": {"type": ["string", "null"]},
                },
            },
        },
    },
}


def _free_components(world: WorldMap) -> int:
    seen = np.zeros_like(world.obstacles)
    comps = 0
    for start in world.free_cells():
        if seen[start[1], start[0]]:
            continue
        comps += 1
        stack = [start]
        seen[start[1], start[0]] = True
        while stack:
            cell = stack.pop()
            for nxt, _ in _neighbours(world, cell, world.is_free):
                if not seen[nxt[1], nxt[0]]:
                    seen[nxt[1], nxt[0]] = True
                    stack.append(nxt)
    return comps


def validate_world(world: WorldMap, episodes: Sequence[EpisodeSpec] = ()) -> None:
    """Check every map invariant; raise ScenarioError naming the culprit."""
    if not (~world.obstacles).any():
        raise ScenarioError("grid: no Free cell")
    if _free_components(world) != 1:
        raise ScenarioError("grid: Free region is not connected")
    owner: dict[Cell, str] = {}
    for room in world.rooms:
        if not room.footprint:
            raise ScenarioError(f"rooms[{room.id}]: empty footprint")
        for c in room.footprint:
            if not world.in_bounds(c):
                raise ScenarioError(f"rooms[{room.id}]: cell {c} out of bounds")
            if c in owner:
                raise ScenarioError(f"rooms[{room.id}]: cell {c} also belongs to room {owner[c]!r}")
            owner[c] = room.id
    for c in world.hallway:
        if not world.in_bounds(c):
            raise ScenarioError(f"hallway: cell {c} out of bounds")
        if c in owner:
            raise ScenarioError(f"hallway: cell {c} overlaps room {owner[c]!r}")
    ids = set()
    target_labels = set()
    room_ids = {r.id for r in world.rooms}
    for obj in world.objects:
        if obj.id in ids:
            raise ScenarioError(f"objects[{obj.id}]: duplicate id")
        ids.add(obj.id)
        if not obj.label.strip():
            raise ScenarioError(f"objects[{obj.id}]: empty label")
        if obj.is_target:
            if obj.label in target_labels:
                raise ScenarioError(f"objects[{obj.id}]: duplicate target label {obj.label!r}")
            target_labels.add(obj.label)
        regions = set()
        for c in obj.cells:
            if not world.is_free(c):
                raise ScenarioError(f"objects[{obj.id}]: cell {c} is not a Free cell")
            regions.add(world.region_of(c))
        if len(regions) != 1 or None in regions:
            raise ScenarioError(f"objects[{obj.id}]: cells must lie within exactly one room or the hallway")
        region = regions.pop()
        if obj.room_id is not None:
            if obj.room_id not in room_ids and obj.room_id != HALLWAY:
                raise ScenarioError(f"objects[{obj.id}]: unknown room_id {obj.room_id!r}")
            if obj.room_id != region:
                raise ScenarioError(f"objects[{obj.id}]: room_id {obj.room_id!r} but cells lie in {region!r}")
    for i, ep in enumerate(episodes):
        if ep.target_label not in target_labels:
            raise ScenarioError(f"episodes[{i}]: no target object labelled {ep.target_label!r}")
        if ep.spawn_room is not None and ep.spawn_room not in room_ids | {HALLWAY}:
            raise ScenarioError(f"episodes[{i}]: unknown spawn_room {ep.spawn_room!r}")


def scenario_from_dict(data: dict) -> tuple[WorldMap, list[EpisodeSpec]]:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {exc.message}") from None
    grid = data["grid"]
    w, h = grid["width"], grid["height"]
    obstacles = np.zeros((h, w), dtype=bool)
    for x, y in grid["obstacle_cells"]:
        if not (0 <= x < w and 0 <= y < h):
            raise ScenarioError(f"grid/obstacle_cells: cell {(x, y)} out of bounds")
        obstacles[y, x] = True
    rooms = [Room(r["id"], r["label"], frozenset(tuple(c) for c in r["cells"])) for r in data["rooms"]]
    objects = [
        ObjectInstance(
            id=o["id"],
            label=o["label"],
            kind=ObjectKind(o["kind"]),
            position=tuple(o["position"]),
            extent=tuple(o.get("extent", (1, 1))),
            room_id=o.get("room_id"),
        )
        for o in data["objects"]
    ]
    similarity = {(s["phrase"], s["label"]): float(s["score"]) for s in data.get("similarity", [])}
    world = WorldMap(
        w, h, grid["cell_size"], obstacles, rooms,
        [tuple(c) for c in data.get("hallway", [])], objects, similarity, data.get("name", ""),
    )
    episodes = [EpisodeSpec(e["target_label"], e["spawn_seed"], e.get("spawn_room")) for e in data["episodes"]]
    validate_world(world, episodes)
    return world, episodes


def scenario_to_dict(world: WorldMap, episodes: Sequence[EpisodeSpec] = ()) -> dict:
    ys, xs = np.nonzero(world.obstacles)
    return {
        "name": world.name,
        "grid": {
            "width": world.width,
            "height": world.height,
            "cell_size": world.cell_size,
            "obstacle_cells": [[int(x), int(y)] for y, x in zip(ys, xs)],
        },
        "rooms": [
            {"id": r.id, "label": r.label, "cells": [list(c) for c in sorted(r.footprint)]}
            for r in world.rooms
        ],
        "hallway": [list(c) for c in sorted(world.hallway)],
        "objects": [
            {"id": o.id, "label": o.label, "kind": o.kind.value, "position": list(o.position),
             "extent": list(o.extent), "room_id": o.room_id}
            for o in world.objects
        ],
        "similarity": [
            {"phrase": p, "label": l, "score": s} for (p, l), s in sorted(world.similarity.items())
        ],
        "episodes": [
            {"target_label": e.target_label, "spawn_seed": e.spawn_seed, "spawn_room": e.spawn_room}
            for e in episodes
        ],
    }


def load_scenario(path: str | Path) -> tuple[WorldMap, list[EpisodeSpec]]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from None
    world, episodes = scenario_from_dict(data)
    if not world.name:
        world.name = path.stem
    return world, episodes


def save_scenario(path: str | Path, world: WorldMap, episodes: Sequence[EpisodeSpec] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(scenario_to_dict(world, episodes), indent=1, sort_keys=True) + "\n")
    return path
