"""Transition-effect taxonomy.

The registry is an ordered list of 30 parametric effects. The first eight form
the desk-scale subset; "direct cut" is optional and always takes the id right
after the last registered effect.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

FAMILIES = ("wipe", "zoom", "fade", "mix", "blur", "flash", "rotate", "shape", "cut")

DIRECT_CUT = "direct cut"

# (name, family, params); order fixes category ids.
_TAXONOMY = [
    ("left", "wipe", {"mode": "edge", "direction": "left"}),
    ("right", "wipe", {"mode": "edge", "direction": "right"}),
    ("up", "wipe", {"mode": "edge", "direction": "up"}),
    ("down", "wipe", {"mode": "edge", "direction": "down"}),
    ("mix", "mix", {"mode": "linear"}),
    ("black fade", "fade", {"color": 0.0}),
    ("pull in", "zoom", {"sign": +1, "amount": 1.0}),
    ("floodlight", "flash", {"mode": "flood", "strength": 1.5}),
    ("dissolve", "mix", {"mode": "dither"}),
    ("pull out", "zoom", {"sign": -1, "amount": 1.0}),
    ("flashing", "flash", {"mode": "pulse", "pulses": 3, "strength": 0.9}),
    ("blur", "blur", {"axis": "both", "radius": 6}),
    ("star", "shape", {"shape": "star"}),
    ("heart", "shape", {"shape": "heart"}),
    ("up left", "wipe", {"mode": "diagonal", "direction": "up left"}),
    ("up right", "wipe", {"mode": "diagonal", "direction": "up right"}),
    ("down left", "wipe", {"mode": "diagonal", "direction": "down left"}),
    ("down right", "wipe", {"mode": "diagonal", "direction": "down right"}),
    ("white fade", "fade", {"color": 1.0}),
    ("rotate clockwise", "rotate", {"sign": -1, "angle": 1.0471975511965976}),
    ("rotate counterclockwise", "rotate", {"sign": +1, "angle": 1.0471975511965976}),
    ("circle", "shape", {"shape": "circle"}),
    ("diamond", "shape", {"shape": "diamond"}),
    ("horizontal split", "wipe", {"mode": "split", "axis": "horizontal"}),
    ("vertical split", "wipe", {"mode": "split", "axis": "vertical"}),
    ("push left", "wipe", {"mode": "push", "direction": "left"}),
    ("push right", "wipe", {"mode": "push", "direction": "right"}),
    ("push up", "wipe", {"mode": "push", "direction": "up"}),
    ("push down", "wipe", {"mode": "push", "direction": "down"}),
    ("motion blur", "blur", {"axis": "horizontal", "radius": 8}),
]

MAX_CATEGORIES = len(_TAXONOMY)
DESK_CATEGORIES = 8
DIRECTIONAL_WIPES = ("left", "right", "up", "down")


@dataclass(frozen=True)
class TransitionCategory:
    id: int
    name: str
    family: str
    params: Dict[str, Any] = field(default_factory=dict, hash=False, compare=False)

    @property
    def is_cut(self):
        return self.family == "cut"


def list_categories(n_categories: int = MAX_CATEGORIES, direct_cut: bool = False) -> List[TransitionCategory]:
    """Return the first ``n_categories`` effects with dense ids, plus "direct cut" if enabled."""
    if not 1 <= n_categories <= MAX_CATEGORIES:
        raise ValueError(f"n_categories must be in [1, {MAX_CATEGORIES}], got {n_categories}")
    cats = [TransitionCategory(i, name, fam, dict(params))
            for i, (name, fam, params) in enumerate(_TAXONOMY[:n_categories])]
    if direct_cut:
        cats.append(TransitionCategory(n_categories, DIRECT_CUT, "cut", {"window": 4}))
    return cats


def category_by_name(name: str, categories: Optional[List[TransitionCategory]] = None) -> TransitionCategory:
    cats = categories if categories is not None else list_categories(direct_cut=True)
    for cat in cats:
        if cat.name == name:
            return cat
    raise KeyError(f"no transition category named {name!r}")
