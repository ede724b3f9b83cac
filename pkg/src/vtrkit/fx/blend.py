"""Per-frame transition kernels.

Every effect reduces to one call of ``kernels.composite`` on (optionally
warped, shifted or blurred) copies of the two frames, with a per-pixel
blend weight and an optional additive light field. Masks use strict
inequalities against pixel-centre fields in ``[0, 1)`` so ``t=0`` selects
``frame_a`` everywhere and ``t=1`` selects ``frame_b`` everywhere.
"""
from functools import lru_cache

import numpy as np

from .. import kernels
from .taxonomy import TransitionCategory


def _check(frame_a, frame_b, t):
    if frame_a.shape != frame_b.shape:
        raise ValueError(f"frame shapes differ: {frame_a.shape} vs {frame_b.shape}")
    if frame_a.ndim != 3:
        raise ValueError(f"frames must be HxWxC arrays, got shape {frame_a.shape}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"progress t must lie in [0, 1], got {t}")


def _grid(H, W):
    y, x = np.meshgrid(np.arange(H, dtype=np.float64), np.arange(W, dtype=np.float64), indexing="ij")
    return x + 0.5, y + 0.5


def _normalise(g):
    # strictly below 1 so that g < t holds everywhere at t == 1
    return (g / (g.max() * (1.0 + 1e-6))).astype(np.float64) if g.max() > 0 else g


@lru_cache(maxsize=64)
def _edge_field(H, W, direction):
    x, y = _grid(H, W)
    if direction == "left":
        return x / W
    if direction == "right":
        return (W - x) / W
    if direction == "down":
        return y / H
    if direction == "up":
        return (H - y) / H
    raise ValueError(direction)


@lru_cache(maxsize=64)
def _diagonal_field(H, W, direction):
    x, y = _grid(H, W)
    fx = x / W if "right" in direction else (W - x) / W
    fy = y / H if "down" in direction else (H - y) / H
    return (fx + fy) / 2.0


@lru_cache(maxsize=64)
def _split_field(H, W, axis):
    x, y = _grid(H, W)
    if axis == "horizontal":
        return np.abs(x - W / 2.0) / (W / 2.0)
    return np.abs(y - H / 2.0) / (H / 2.0)


@lru_cache(maxsize=64)
def _shape_field(H, W, shape):
    x, y = _grid(H, W)
    dx = (x - W / 2.0) / (W / 2.0)
    dy = (y - H / 2.0) / (H / 2.0)
    r = np.hypot(dx, dy)
    theta = np.arctan2(-dy, dx)
    if shape == "circle":
        g = r
    elif shape == "diamond":
        g = np.abs(dx) + np.abs(dy)
    elif shape == "star":
        g = r / (1.0 + 0.45 * np.cos(5.0 * (theta - np.pi / 2.0)))
    elif shape == "heart":
        g = r / (0.3 + 0.35 * (1.0 - np.sin(theta)))
    else:
        raise ValueError(shape)
    return _normalise(g)


@lru_cache(maxsize=64)
def _dither_field(H, W):
    idx = np.arange(H * W, dtype=np.uint64).reshape(H, W)
    h = (idx + np.uint64(0x9E3779B9)) & np.uint64(0xFFFFFFFF)
    # murmur3 finaliser
    h ^= h >> np.uint64(16)
    h = (h * np.uint64(0x85EBCA6B)) & np.uint64(0xFFFFFFFF)
    h ^= h >> np.uint64(13)
    h = (h * np.uint64(0xC2B2AE35)) & np.uint64(0xFFFFFFFF)
    h ^= h >> np.uint64(16)
    return ((h >> np.uint64(8)).astype(np.float64) + 0.5) / float(1 << 24)


@lru_cache(maxsize=64)
def _flood_field(H, W):
    x, y = _grid(H, W)
    d = np.hypot(x, y) / np.hypot(W, H)
    return np.clip(1.2 - 1.2 * d, 0.0, 1.0).astype(np.float32)


@lru_cache(maxsize=16)
def _const(H, W, value):
    arr = np.full((H, W), value, dtype=np.float32)
    arr.setflags(write=False)
    return arr


def _mask(field, t):
    return (field < t).astype(np.float32)


def _push(frame_a, frame_b, direction, t):
    H, W = frame_a.shape[:2]
    if direction in ("left", "right"):
        s = int(np.rint(t * W))
        if direction == "left":
            return np.concatenate([frame_a[:, s:], frame_b[:, :s]], axis=1)
        return np.concatenate([frame_b[:, W - s:], frame_a[:, :W - s]], axis=1)
    s = int(np.rint(t * H))
    if direction == "up":
        return np.concatenate([frame_a[s:], frame_b[:s]], axis=0)
    return np.concatenate([frame_b[H - s:], frame_a[:H - s]], axis=0)


def blend_frame(frame_a, frame_b, category: TransitionCategory, t: float):
    """Render one transition frame at progress ``t`` from ``frame_a`` towards ``frame_b``.

    Frames are float arrays of shape (H, W, 3) with values in [0, 1]. The
    result has the same shape and dtype ``float32``.
    """
    a = np.ascontiguousarray(frame_a, dtype=np.float32)
    b = np.ascontiguousarray(frame_b, dtype=np.float32)
    t = float(t)
    _check(a, b, t)
    H, W = a.shape[:2]
    fam, p = category.family, category.params
    zeros, ones = _const(H, W, 0.0), _const(H, W, 1.0)
    gain_a = gain_b = 1.0
    offset = light = 0.0
    light_map = zeros

    if fam == "wipe":
        mode = p["mode"]
        if mode == "push":
            return np.ascontiguousarray(_push(a, b, p["direction"], t), dtype=np.float32)
        if mode == "edge":
            field = _edge_field(H, W, p["direction"])
        elif mode == "diagonal":
            field = _diagonal_field(H, W, p["direction"])
        else:
            field = _split_field(H, W, p["axis"])
        alpha = _mask(field, t)
    elif fam == "shape":
        alpha = _mask(_shape_field(H, W, p["shape"]), t)
    elif fam == "mix":
        alpha = _mask(_dither_field(H, W), t) if p["mode"] == "dither" else _const(H, W, np.float32(t))
    elif fam == "fade":
        color = float(p["color"])
        if t < 0.5:
            alpha, gain_a, offset = zeros, 1.0 - 2.0 * t, color * 2.0 * t
        else:
            alpha, gain_b, offset = ones, 2.0 * t - 1.0, color * (2.0 - 2.0 * t)
    elif fam == "zoom":
        amount = p["amount"]
        sa, sb = 1.0 + amount * t, 1.0 + amount * (1.0 - t)
        if p["sign"] < 0:
            sa, sb = 1.0 / sa, 1.0 / sb
        # the outgoing shot zooms until mid-way, then the incoming one settles back: a hard switch, no ghosting
        a = kernels.warp_affine(a, sa, 0.0)
        b = kernels.warp_affine(b, sb, 0.0)
        alpha = ones if t >= 0.5 else zeros
    elif fam == "rotate":
        theta = p["sign"] * p["angle"]
        a = kernels.warp_affine(a, 1.0 + 0.5 * t, theta * t)
        b = kernels.warp_affine(b, 1.0 + 0.5 * (1.0 - t), -theta * (1.0 - t))
        alpha = _const(H, W, np.float32(t))
    elif fam == "blur":
        k = int(np.rint(p["radius"] * 4.0 * t * (1.0 - t)))
        ry = k if p["axis"] == "both" else 0
        if k:
            a = kernels.box_blur(a, k, ry)
            b = kernels.box_blur(b, k, ry)
        alpha = _const(H, W, np.float32(t))
    elif fam == "flash":
        if p["mode"] == "flood":
            alpha = _const(H, W, np.float32(t))
            light = p["strength"] * 4.0 * t * (1.0 - t)
            light_map = _flood_field(H, W)
        else:
            u = (p["pulses"] * t) % 1.0
            alpha = ones if t >= 0.5 else zeros
            light = p["strength"] * (4.0 * u * (1.0 - u)) ** 2
            light_map = ones
    elif fam == "cut":
        alpha = ones if t >= 0.5 else zeros
    else:
        raise ValueError(f"unknown transition family {fam!r}")

    return kernels.composite(a, b, alpha, gain_a, gain_b, offset, light, light_map)
