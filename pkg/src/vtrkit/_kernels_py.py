"""NumPy implementation of the renderer kernels.

Operation order follows ``_kernels.pyx`` so the two backends agree to rounding.
"""
import numpy as np


def warp_affine(src, scale, angle):
    src = np.ascontiguousarray(src, dtype=np.float32)
    H, W, _ = src.shape
    cx, cy = (W - 1) / 2.0, (H - 1) / 2.0
    ca, sa = np.cos(angle) / scale, np.sin(angle) / scale
    dy, dx = np.meshgrid(np.arange(H, dtype=np.float64) - cy,
                         np.arange(W, dtype=np.float64) - cx, indexing="ij")
    sx = np.clip(cx + dx * ca + dy * sa, 0.0, W - 1)
    sy = np.clip(cy - dx * sa + dy * ca, 0.0, H - 1)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    x1 = np.minimum(x0 + 1, W - 1)
    y1 = np.minimum(y0 + 1, H - 1)
    s = src.astype(np.float64)
    top = (1.0 - fx) * s[y0, x0] + fx * s[y0, x1]
    bot = (1.0 - fx) * s[y1, x0] + fx * s[y1, x1]
    return ((1.0 - fy) * top + fy * bot).astype(np.float32)


def box_blur(src, rx, ry):
    src = np.asarray(src, dtype=np.float32)
    H, W, _ = src.shape
    s = src.astype(np.float64)
    cols = np.arange(W)
    acc = np.zeros_like(s)
    for k in range(-rx, rx + 1):
        acc = acc + s[:, np.clip(cols + k, 0, W - 1)]
    tmp = acc / (2 * rx + 1)
    rows = np.arange(H)
    acc = np.zeros_like(s)
    for k in range(-ry, ry + 1):
        acc = acc + tmp[np.clip(rows + k, 0, H - 1)]
    return (acc / (2 * ry + 1)).astype(np.float32)


def composite(a, b, alpha, gain_a, gain_b, offset, light, light_map):
    al = np.asarray(alpha, dtype=np.float32).astype(np.float64)[..., None]
    wa = gain_a * (1.0 - al)
    wb = gain_b * al
    add = light * np.asarray(light_map, dtype=np.float32).astype(np.float64)[..., None]
    v = wa * np.asarray(a, dtype=np.float32) + wb * np.asarray(b, dtype=np.float32) + offset + add
    return np.clip(v, 0.0, 1.0).astype(np.float32)
