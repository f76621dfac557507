"""Token tables for the deterministic rule grammar.

Every word the rule backend understands lives here, shared by the parser,
the tests, and the docs. Anything not in these tables is ignored.
"""

from __future__ import annotations

# Verbs that start a new instruction when they follow "and" or a comma.
SPLIT_VERBS = frozenset({
    "add", "insert", "place", "put", "create", "make", "remove", "delete",
    "clear", "move", "shift", "modify", "change", "adjust", "rotate",
    "render", "generate", "paint", "repaint", "recolor", "turn", "let",
})

DELETE_VERBS = frozenset({"remove", "delete", "clear"})
ADD_VERBS = frozenset({"add", "insert", "place", "put", "create", "make"})
MODIFY_VERBS = frozenset({"modify", "change", "make", "adjust", "repaint"})
PAINT_VERBS = frozenset({"paint", "repaint", "recolor"})

SPEED_WORDS = {
    "slow": 3.0, "slowly": 3.0, "slower": 3.0,
    "normal": 8.0,
    "fast": 15.0, "quickly": 15.0, "faster": 15.0, "quicker": 15.0,
}
DEFAULT_SPEED = 8.0

COLOR_WORDS = {
    "red": (1.0, 0.0, 0.0),
    "green": (0.0, 1.0, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "white": (1.0, 1.0, 1.0),
    "black": (0.0, 0.0, 0.0),
    "yellow": (1.0, 1.0, 0.0),
    "orange": (1.0, 0.5, 0.0),
    "silver": (0.75, 0.75, 0.75),
    "gray": (0.5, 0.5, 0.5),
    "grey": (0.5, 0.5, 0.5),
    "purple": (0.5, 0.0, 0.5),
    "brown": (0.4, 0.25, 0.1),
    "pink": (1.0, 0.6, 0.7),
    "cyan": (0.0, 1.0, 1.0),
}

# type words normalize plurals and synonyms to catalog type labels
TYPE_WORDS = {
    "car": "car", "cars": "car", "vehicle": "car", "vehicles": "car",
    "truck": "truck", "trucks": "truck",
    "suv": "suv", "suvs": "suv",
    "van": "van", "vans": "van",
    "police": "police",
}

BRAND_WORDS = {
    "porsche": "Porsche",
    "chevrolet": "Chevrolet",
    "mini": "Mini",
    "audi": "Audi",
    "bmw": "BMW",
    "tesla": "Tesla",
    "toyota": "Toyota",
    "dodge": "Dodge",
    "ford": "Ford",
    "honda": "Honda",
}

SECTOR_WORDS = {
    "left front": "LeftFront",
    "right front": "RightFront",
    "front": "Front",
    "left": "Left",
    "right": "Right",
    "back": "Back",
    "behind": "Back",
}

# view translation directions in the ego frame (x forward, y left, z up)
VIEW_DIRECTIONS = {
    "ahead": (1.0, 0.0, 0.0), "forward": (1.0, 0.0, 0.0),
    "forwards": (1.0, 0.0, 0.0),
    "back": (-1.0, 0.0, 0.0), "backward": (-1.0, 0.0, 0.0),
    "backwards": (-1.0, 0.0, 0.0), "behind": (-1.0, 0.0, 0.0),
    "left": (0.0, 1.0, 0.0),
    "right": (0.0, -1.0, 0.0),
    "above": (0.0, 0.0, 1.0), "up": (0.0, 0.0, 1.0),
    "higher": (0.0, 0.0, 1.0),
    "below": (0.0, 0.0, -1.0), "down": (0.0, 0.0, -1.0),
    "lower": (0.0, 0.0, -1.0),
}

# rotation words: (axis index into (yaw, pitch, roll) degrees, sign)
VIEW_ROTATIONS = {
    "left": (0, 1.0),
    "right": (0, -1.0),
    "up": (1, -1.0),
    "down": (1, 1.0),
}

NUMBER_WORDS = {
    "a": 1, "an": 1, "one": 1, "another": 1, "two": 2, "three": 3,
    "four": 4, "five": 5, "six": 6, "seven": 7, "eight": 8, "nine": 9,
    "ten": 10,
}

# movement action cues, checked in order (first hit wins)
ACTION_CUES = (
    ("turn left", "TurnLeft"),
    ("turning left", "TurnLeft"),
    ("turns left", "TurnLeft"),
    ("turn right", "TurnRight"),
    ("turning right", "TurnRight"),
    ("turns right", "TurnRight"),
    ("park", "Park"),
    ("parked", "Park"),
    ("stationary", "Park"),
    ("stopped", "Park"),
    ("stop", "Park"),
    ("halt", "Park"),
    ("backward", "Backward"),
    ("reverse", "Backward"),
    ("backing", "Backward"),
)

TOWARD_CUES = ("toward me", "towards me", "toward us", "towards us",
               "at me", "chasing", "following")
AWAY_CUES = ("away",)
CRAZY_CUES = ("wrong way", "wrong-way")

CLOSE_RANGE = (0.0, 15.0)
FAR_RANGE = (40.0, 80.0)
DISTANCE_HALF_WIDTH = 5.0

TRAFFIC_JAM_CUES = ("traffic jam", "traffic-jam")
TRAFFIC_JAM_COUNT = 8
TRAFFIC_JAM_TEXT = "Add a stationary car to the front (traffic jam {i} of {n})."

EGO_MOTION_SECONDS = 1.0

DEFAULT_DURATION = 4.0
DEFAULT_SAMPLE_RATE = 10.0

# words dropped from reference descriptors before matching; pronouns carry
# no attributes, so a bare "it" resolves purely by recency
REFERENCE_FILLERS = frozenset({"the", "a", "an", "added", "new",
                               "it", "them", "that", "this", "one"})
