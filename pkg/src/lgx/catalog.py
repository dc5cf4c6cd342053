"""Room templates: common furniture and the freeform targets that belong there.

The first four rooms mirror the real-world two-phase layout (kitchen,
living room, bedroom, office); the rest widen the generated houses.
"""
from __future__ import annotations

ROOM_TEMPLATES: dict[str, dict[str, list[str]]] = {
    "kitchen": {
        "common": ["sink", "fridge", "stove", "microwave"],
        "targets": ["Red Bull can", "Stevia sugar packets", "cat-shaped mug"],
    },
    "living room": {
        "common": ["couch", "tv", "armchair", "bookshelf"],
        "targets": ["remote control", "coffee table", "blue pillow"],
    },
    "bedroom": {
        "common": ["bed", "blanket", "dresser", "nightstand"],
        "targets": ["bust", "olive-colored jacket", "striped sock"],
    },
    "office": {
        "common": ["desk", "computer", "printer", "office chair"],
        "targets": ["silver pen", "whiteboard", "green stapler"],
    },
    "bathroom": {
        "common": ["toilet", "bathtub", "towel rack"],
        "targets": ["spray bottle", "rubber duck"],
    },
    "dining room": {
        "common": ["dining table", "cabinet", "chandelier"],
        "targets": ["ceramic vase", "wooden bowl"],
    },
}

# Two-phase layout: (room, targets, common objects)
TWO_PHASE_ROOMS = [
    ("kitchen", ["Red Bull can", "Stevia sugar packets"], ["sink", "fridge"]),
    ("living room", ["remote control", "coffee table"], ["couch", "tv"]),
    ("bedroom", ["bust", "olive-colored jacket"], ["bed", "blanket"]),
    ("office", ["silver pen", "whiteboard"], ["desk", "computer"]),
]

HALLWAY_LABEL = "hallway"

IN_ROOM_AFFINITY = 1.0
HALLWAY_AFFINITY = 0.5
UNRELATED_AFFINITY = 0.1


def room_of_target(label: str) -> str | None:
    for room, spec in ROOM_TEMPLATES.items():
        if label in spec["targets"]:
            return room
    return None


def default_affinity() -> dict[tuple[str, str], float]:
    """Commonsense co-occurrence prior: same-room pairs score highest, the
    hallway sits between those and unrelated furniture."""
    table: dict[tuple[str, str], float] = {}
    all_common = {c for spec in ROOM_TEMPLATES.values() for c in spec["common"]}
    for room, spec in ROOM_TEMPLATES.items():
        for target in spec["targets"]:
            for c in all_common:
                table[(target, c)] = IN_ROOM_AFFINITY if c in spec["common"] else UNRELATED_AFFINITY
            table[(target, HALLWAY_LABEL)] = HALLWAY_AFFINITY
    return table
