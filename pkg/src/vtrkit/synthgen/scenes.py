"""Procedural shot content: tileable textures under camera motion and lighting."""
from dataclasses import asdict, dataclass

import numpy as np

from .. import kernels
from ..fx import Shot

MOTIONS = ("pan-left", "pan-right", "pan-up", "pan-down", "zoom-in", "zoom-out", "static")
PANS = MOTIONS[:4]
BRIGHTNESS = ("bright", "dark", "flash")

_LEVELS = {"bright": (0.45, 0.95), "dark": (0.05, 0.4), "flash": (0.25, 0.65)}


@dataclass(frozen=True)
class SceneSpec:
    motion: str
    brightness_profile: str
    texture_seed: int

    def __post_init__(self):
        if self.motion not in MOTIONS:
            raise ValueError(f"unknown motion {self.motion!r}")
        if self.brightness_profile not in BRIGHTNESS:
            raise ValueError(f"unknown brightness profile {self.brightness_profile!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(d["motion"], d["brightness_profile"], int(d["texture_seed"]))


def texture(seed, height, width, n_waves=8, max_freq=5):
    """Smooth periodic RGB field in [0, 1]; integer frequencies make it tile exactly.

    The summed waves are standardised and squashed through ``tanh`` so the
    texture uses most of the range instead of clustering around mid-grey.
    """
    rng = np.random.default_rng(seed)
    y, x = np.meshgrid(np.arange(height) / height, np.arange(width) / width, indexing="ij")
    lum = np.zeros((height, width))
    for _ in range(n_waves):
        fx, fy = rng.integers(-max_freq, max_freq + 1, size=2)
        if fx == 0 and fy == 0:
            fx = 1
        lum += rng.uniform(0.5, 1.0) * np.cos(2 * np.pi * (fx * x + fy * y) + rng.uniform(0, 2 * np.pi))
    lum = 0.5 + 0.5 * np.tanh(1.5 * (lum - lum.mean()) / max(lum.std(), 1e-12))
    tint = rng.uniform(0.6, 1.0, size=3)
    return lum[..., None] * tint[None, None, :]


def generate_shot(spec: SceneSpec, duration_s: float, fps: float, dims, pan_velocity: int = 2,
                  zoom_rate: float = 0.02) -> Shot:
    """Render a shot realising ``spec`` deterministically.

    Pans shift the texture cyclically by ``pan_velocity`` pixels per frame;
    zooms rescale it by ``zoom_rate`` per frame about the centre.
    """
    height, width = dims
    n = int(round(duration_s * fps))
    lo, hi = _LEVELS[spec.brightness_profile]
    base = (lo + (hi - lo) * texture(spec.texture_seed, height, width)).astype(np.float32)
    frames = np.empty((n, height, width, 3), dtype=np.float32)
    m = spec.motion
    for i in range(n):
        if m == "static":
            f = base
        elif m in PANS:
            shift = i * pan_velocity
            if m == "pan-left":
                f = np.roll(base, -shift, axis=1)
            elif m == "pan-right":
                f = np.roll(base, shift, axis=1)
            elif m == "pan-up":
                f = np.roll(base, -shift, axis=0)
            else:
                f = np.roll(base, shift, axis=0)
        else:
            step = i if m == "zoom-in" else n - 1 - i
            f = kernels.warp_affine(base, (1.0 + zoom_rate) ** step, 0.0)
        frames[i] = f
    if spec.brightness_profile == "flash":
        boost = 0.45 * np.maximum(0.0, np.cos(2 * np.pi * np.arange(n) / 6.0)) ** 2
        frames = np.clip(frames + boost[:, None, None, None].astype(np.float32), 0.0, 1.0)
    return Shot(frames, fps)
