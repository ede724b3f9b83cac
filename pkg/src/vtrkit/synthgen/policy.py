"""Planted correspondence between shot content, audio mood and transition labels.

``deterministic`` maps each boundary's (outgoing spec, incoming spec, mood)
to one label by a fixed rule table. ``stochastic`` follows the rule with high
probability and biases soft audio towards gentle effects. ``prior`` ignores
content and draws from a (possibly long-tailed) category prior.

``sequential=True`` makes labels depend on where a boundary sits in the
video. The deterministic policy closes every video with a fade to black; the
sampled policies never repeat the previous boundary's label.
"""
from typing import List, Optional, Sequence

import numpy as np

from ..fx import DIRECT_CUT, TransitionCategory
from .scenes import PANS, SceneSpec

POLICIES = ("deterministic", "stochastic", "prior")
GENTLE = ("mix", "dissolve", "black fade")

_PAN_WIPE = {"pan-left": "left", "pan-right": "right", "pan-up": "up", "pan-down": "down"}

CLOSING = "black fade"


def _first(names, available):
    for name in names:
        if name in available:
            return name
    raise KeyError(f"none of {names} is registered")


def rule_label(spec_a: SceneSpec, spec_b: SceneSpec, mood: str, available) -> str:
    """Label name the deterministic rule assigns to one boundary."""
    m1, m2 = spec_a.motion, spec_b.motion
    lights = (spec_a.brightness_profile, spec_b.brightness_profile)
    energetic = mood == "energetic"
    if m1 == m2 and m1 in PANS:
        return _PAN_WIPE[m1]
    if "flash" in lights:
        return _first(["flashing", "floodlight"] if energetic else ["floodlight"], available)
    if "zoom-in" in (m1, m2):
        return _first(["pull in"] if energetic else ["dissolve", "mix"], available)
    if "zoom-out" in (m1, m2):
        return _first(["pull out", "pull in"] if energetic else ["blur", "black fade"], available)
    if m2 in PANS:
        return _PAN_WIPE[m2] if energetic else "mix"
    if energetic and m1 == m2 == "static" and DIRECT_CUT in available:
        return DIRECT_CUT
    if "dark" in lights:
        return "black fade"
    return _first(["floodlight"] if energetic else ["mix"], available)


def category_prior(n, kind="uniform", exponent=1.2):
    if kind == "uniform":
        p = np.ones(n)
    elif kind == "zipf":
        p = 1.0 / np.arange(1, n + 1) ** exponent
    else:
        raise ValueError(f"unknown prior {kind!r}")
    return p / p.sum()


def deterministic_labels(scene_specs: Sequence[SceneSpec], mood: str, categories: Sequence[TransitionCategory],
                         sequential: bool = False) -> List[TransitionCategory]:
    """Labels of the deterministic policy; the Bayes-optimal decision rule.

    With ``sequential`` the last boundary of the video takes the closing
    label (when registered) whatever its shots are, so a label can only be
    predicted knowing the boundary's place in the sequence.
    """
    by_name = {c.name: c for c in categories}
    names = [rule_label(a, b, mood, by_name) for a, b in zip(scene_specs[:-1], scene_specs[1:])]
    if sequential and CLOSING in by_name:
        names[-1] = CLOSING
    return [by_name[n] for n in names]


def sample_transition_labels(scene_specs: Sequence[SceneSpec], audio, policy: str = "deterministic",
                             seed: int = 0, categories: Optional[Sequence[TransitionCategory]] = None,
                             sequential: bool = False, prior=None, gentle_p: float = 0.75,
                             peak_p: float = 0.8) -> List[TransitionCategory]:
    """Draw one label per boundary between consecutive ``scene_specs``.

    ``audio`` may be an AudioTrack or a mood string.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if len(scene_specs) < 2:
        raise ValueError("need at least two scene specs")
    if categories is None:
        from ..fx import list_categories
        categories = list_categories()
    mood = audio if isinstance(audio, str) else audio.mood
    if policy == "deterministic":
        return deterministic_labels(scene_specs, mood, categories, sequential)

    rng = np.random.default_rng(seed)
    cats = list(categories)
    n = len(cats)
    prior = category_prior(n) if prior is None else np.asarray(prior, dtype=float)
    by_name = {c.name: c for c in cats}
    gentle_ids = [by_name[g].id for g in GENTLE if g in by_name]
    out: List[TransitionCategory] = []
    for a, b in zip(scene_specs[:-1], scene_specs[1:]):
        p = prior.copy()
        if policy == "stochastic":
            rule = by_name[rule_label(a, b, mood, by_name)].id
            p = (1.0 - peak_p) * p
            p[rule] += peak_p
            if mood == "soft" and gentle_ids:
                g = np.zeros(n)
                g[gentle_ids] = 1.0 / len(gentle_ids)
                p = gentle_p * g + (1.0 - gentle_p) * p
        if sequential and out:
            p[out[-1].id] = 0.0
        p = p / p.sum()
        out.append(cats[int(rng.choice(n, p=p))])
    return out
