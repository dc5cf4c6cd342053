"""Simulated rotate-in-place percepts.

A scan yields ``360 / resolution`` views.  Each view lists the objects whose
cells are in its angular sector, in range and unoccluded, plus a fan of
depth rays used to grow the agent's costmap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .world import ObjectInstance, ObjectKind, Pose, WorldMap, sample_step

DIRECTIONS = ("Front", "Right", "Behind", "Left")
CAPTION_K = 3


@dataclass(frozen=True)
class ScanConfig:
    resolution: float = 30.0
    fov: float | None = None
    max_range: float = 5.0
    detect_prob: float = 1.0
    seed: int = 0
    ray_step: float = 1.0  # degrees between depth rays

    def __post_init__(self):
        if self.resolution <= 0 or (360.0 / self.resolution) % 1 != 0:
            raise ValueError(f"resolution {self.resolution} must divide 360")
        if not 0 < self.view_fov <= 360:
            raise ValueError(f"fov {self.fov} must be in (0, 360]")
        if not 0.0 <= self.detect_prob <= 1.0:
            raise ValueError(f"detect_prob {self.detect_prob} not in [0, 1]")
        if self.max_range <= 0 or self.ray_step <= 0:
            raise ValueError("max_range and ray_step must be positive")

    @property
    def view_fov(self) -> float:
        return self.resolution if self.fov is None else self.fov

    @property
    def n_views(self) -> int:
        return int(round(360.0 / self.resolution))


@dataclass(frozen=True)
class Sighting:
    object_id: str
    label: str
    kind: ObjectKind
    bearing: float
    distance: float


@dataclass
class View:
    index: int
    heading: float
    origin: tuple[float, float]
    visible_objects: list[Sighting] = field(default_factory=list)
    ray_bearings: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ray_distances: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ray_hits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def depth_rays(self) -> list[tuple[float, float]]:
        return list(zip(self.ray_bearings.tolist(), self.ray_distances.tolist()))

    def sees(self, object_id: str) -> Sighting | None:
        for s in self.visible_objects:
            if s.object_id == object_id:
                return s
        return None

    def summary(self) -> dict:
        return {
            "index": self.index,
            "heading": round(self.heading, 6),
            "objects": [[s.label, round(s.bearing, 3), round(s.distance, 3)] for s in self.visible_objects],
        }


@dataclass
class DetectionSet:
    labels: list[str] = field(default_factory=list)
    provenance: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    def __bool__(self) -> bool:
        return bool(self.labels)


@dataclass(frozen=True)
class CaptionSet:
    front: str
    right: str
    behind: str
    left: str
    labels: tuple[tuple[str, ...], ...] = ((), (), (), ())

    def by_direction(self) -> dict[str, str]:
        return dict(zip(DIRECTIONS, (self.front, self.right, self.behind, self.left)))

    def labels_by_direction(self) -> dict[str, tuple[str, ...]]:
        return dict(zip(DIRECTIONS, self.labels))


def angle_diff(a: float, b: float) -> float:
    """Signed difference ``a - b`` wrapped to [-180, 180)."""
    return (a - b + 180.0) % 360.0 - 180.0


def _ray_cells(world: WorldMap, origin: tuple[float, float], bearings: np.ndarray, max_range: float):
    # Sampled once here so scanning and costmap updates agree cell-for-cell.
    step = sample_step(world.cell_size)
    t = np.arange(0.0, max_range + 1e-9, step)
    rad = np.deg2rad(bearings)[:, None]
    px = origin[0] + np.cos(rad) * t
    py = origin[1] + np.sin(rad) * t
    ix = np.floor(px / world.cell_size).astype(int)
    iy = np.floor(py / world.cell_size).astype(int)
    return ix, iy, t


def _cast(world: WorldMap, origin, bearings: np.ndarray, max_range: float):
    ix, iy, t = _ray_cells(world, origin, bearings, max_range)
    inside = (ix >= 0) & (ix < world.width) & (iy >= 0) & (iy < world.height)
    blocked = ~inside
    blocked[inside] = world.obstacles[iy[inside], ix[inside]]
    hit = blocked.any(axis=1)
    first = np.argmax(blocked, axis=1)
    dist = np.where(hit, t[first], max_range)
    return dist, hit


def is_landmark(obj: ObjectInstance) -> bool:
    """Region landmarks carry their region's name as label (the hallway)."""
    return obj.room_id is not None and obj.label == obj.room_id


def visible_sightings(world: WorldMap, pose: Pose, max_range: float) -> list[tuple[ObjectInstance, float, float]]:
    """(object, bearing, distance) for every visible object cell from ``pose``.

    A region landmark is not reported from inside its own region.
    """
    out = []
    origin = (pose.x, pose.y)
    here = world.region_of(world.cell_of(pose))
    for obj in world.objects:
        if here is not None and is_landmark(obj) and obj.room_id == here:
            continue
        cells = np.array(obj.cells, dtype=float)
        centers = (cells + 0.5) * world.cell_size
        dx = centers[:, 0] - pose.x
        dy = centers[:, 1] - pose.y
        d = np.hypot(dx, dy)
        near = d <= max_range + 1e-9
        if not near.any():
            continue
        clear = np.zeros(len(cells), dtype=bool)
        clear[near] = world.line_of_sight(origin, cells[near])
        for i in np.nonzero(clear)[0]:
            bearing = pose.heading if d[i] == 0 else math.degrees(math.atan2(dy[i], dx[i])) % 360.0
            out.append((obj, bearing, float(d[i])))
    return out


def rotate_scan(world: WorldMap, pose: Pose, cfg: ScanConfig) -> list[View]:
    """Rotate in place: one View per ``cfg.resolution`` degrees."""
    cell = world.cell_of(pose)
    if not world.is_free(cell):
        raise ValueError(f"pose {pose} is not on a Free cell")
    fov = cfg.view_fov
    cells = visible_sightings(world, pose, cfg.max_range)
    views = []
    for k in range(cfg.n_views):
        heading = (pose.heading + k * cfg.resolution) % 360.0
        best: dict[str, Sighting] = {}
        for obj, bearing, dist in cells:
            rel = angle_diff(bearing, heading)
            if not (-fov / 2 <= rel < fov / 2):
                continue
            prev = best.get(obj.id)
            if prev is None or dist < prev.distance:
                best[obj.id] = Sighting(obj.id, obj.label, obj.kind, bearing, dist)
        sightings = sorted(best.values(), key=lambda s: (s.distance, s.object_id))
        n_rays = max(1, int(round(fov / cfg.ray_step)))
        bearings = (heading - fov / 2 + (np.arange(n_rays) + 0.5) * fov / n_rays) % 360.0
        dist, hit = _cast(world, (pose.x, pose.y), bearings, cfg.max_range)
        views.append(View(k, heading, (pose.x, pose.y), sightings, bearings, dist, hit))
    return views


def detect_objects(views: list[View], cfg: ScanConfig) -> DetectionSet:
    """Detector stand-in: Bernoulli(detect_prob) per visible Common object.

    Target objects never appear here; they are only found by grounding.
    """
    rng = np.random.default_rng(cfg.seed)
    decided: dict[str, bool] = {}
    out = DetectionSet()
    for view in views:
        for s in view.visible_objects:
            if s.kind is not ObjectKind.COMMON:
                continue
            if s.object_id not in decided:
                decided[s.object_id] = bool(rng.random() < cfg.detect_prob)
            if decided[s.object_id] and s.label not in out.provenance:
                out.labels.append(s.label)
                out.provenance[s.label] = view.index
    return out


def _with_article(label: str) -> str:
    return ("an " if label[:1].lower() in "aeiou" else "a ") + label


def caption_text(labels: list[str] | tuple[str, ...]) -> str:
    if not labels:
        return "an empty area"
    items = [_with_article(l) for l in labels]
    if len(items) == 1:
        body = items[0]
    elif len(items) == 2:
        body = f"{items[0]} and {items[1]}"
    else:
        body = ", ".join(items[:-1]) + ", and " + items[-1]
    return "a room with " + body


def caption_views(views: list[View], k: int = CAPTION_K) -> CaptionSet:
    """Captioner stand-in for a 90-degree scan: Front, Right, Behind, Left."""
    if len(views) != 4:
        raise ValueError(f"captioning needs exactly 4 views, got {len(views)}")
    per_view = []
    for view in views:
        labels: list[str] = []
        for s in view.visible_objects:  # already nearest-first
            if s.kind is ObjectKind.COMMON and s.label not in labels:
                labels.append(s.label)
        per_view.append(tuple(labels[:k]))
    texts = [caption_text(l) for l in per_view]
    return CaptionSet(*texts, labels=tuple(per_view))


class CellState(IntEnum):
    UNKNOWN = 0
    FREE = 1
    OBSTACLE = 2


@dataclass
class Costmap:
    """Agent-built traversability grid, indexed ``[y, x]``."""

    grid: np.ndarray
    cell_size: float

    @classmethod
    def empty(cls, world: WorldMap) -> Costmap:
        return cls(np.zeros((world.height, world.width), dtype=np.int8), world.cell_size)

    @classmethod
    def from_array(cls, grid, cell_size: float = 0.25) -> Costmap:
        return cls(np.asarray(grid, dtype=np.int8).copy(), cell_size)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def state(self, cell) -> CellState:
        return CellState(int(self.grid[cell[1], cell[0]]))

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_free(self, cell) -> bool:
        return self.in_bounds(cell) and self.grid[cell[1], cell[0]] == CellState.FREE

    def known(self) -> np.ndarray:
        return self.grid != CellState.UNKNOWN

    def free_cells(self) -> list[tuple[int, int]]:
        ys, xs = np.nonzero(self.grid == CellState.FREE)
        return [(int(x), int(y)) for y, x in zip(ys, xs)]

    def copy(self) -> Costmap:
        return Costmap(self.grid.copy(), self.cell_size)


def update_costmap(costmap: Costmap, pose: Pose, views: list[View]) -> Costmap:
    """Integrate depth rays: free up to each hit, obstacle at the hit."""
    out = costmap.copy()
    g = out.grid
    h, w = g.shape
    fake = _GridShape(w, h, costmap.cell_size)
    for view in views:
        if len(view.ray_bearings) == 0:
            continue
        max_range = float(view.ray_distances.max())
        ix, iy, t = _ray_cells(fake, view.origin, view.ray_bearings, max_range)
        inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        dist = view.ray_distances[:, None]
        free = inside & (t[None, :] < dist - 1e-12)
        fx, fy = ix[free], iy[free]
        unknown = g[fy, fx] == CellState.UNKNOWN
        g[fy[unknown], fx[unknown]] = CellState.FREE
        hit_rows = np.nonzero(view.ray_hits)[0]
        if len(hit_rows):
            cols = np.searchsorted(t, view.ray_distances[hit_rows] - 1e-12)
            ok = cols < len(t)
            r, c = hit_rows[ok], cols[ok]
            hx, hy = ix[r, c], iy[r, c]
            inb = (hx >= 0) & (hx < w) & (hy >= 0) & (hy < h)
            g[hy[inb], hx[inb]] = CellState.OBSTACLE
    return out


@dataclass(frozen=True)
class _GridShape:
    width: int
    height: int
    cell_size: float
