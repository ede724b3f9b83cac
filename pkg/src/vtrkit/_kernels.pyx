# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-pixel kernels used by the transition renderer and shot generator.

Every function mirrors ``vtrkit._kernels_py`` operation for operation so both
backends agree to floating-point rounding. Frames are ``float32`` arrays of
shape ``(H, W, C)``; intermediate arithmetic is done in double precision.
"""
import numpy as np

from libc.math cimport cos, floor, sin


def warp_affine(const float[:, :, ::1] src, double scale, double angle):
    """Rotate by ``angle`` radians and magnify by ``scale`` about the frame centre.

    Bilinear sampling with edge clamping. ``scale=1, angle=0`` is an exact copy.
    """
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1], C = src.shape[2]
    out_arr = np.empty((H, W, C), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr
    cdef double cx = (W - 1) / 2.0, cy = (H - 1) / 2.0
    cdef double ca = cos(angle) / scale, sa = sin(angle) / scale
    cdef double dx, dy, sx, sy, fx, fy, top, bot
    cdef Py_ssize_t x, y, c, x0, y0, x1, y1
    for y in range(H):
        dy = y - cy
        for x in range(W):
            dx = x - cx
            sx = cx + dx * ca + dy * sa
            sy = cy - dx * sa + dy * ca
            if sx < 0.0:
                sx = 0.0
            elif sx > W - 1:
                sx = W - 1
            if sy < 0.0:
                sy = 0.0
            elif sy > H - 1:
                sy = H - 1
            x0 = <Py_ssize_t>floor(sx)
            y0 = <Py_ssize_t>floor(sy)
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1 if x0 + 1 < W else W - 1
            y1 = y0 + 1 if y0 + 1 < H else H - 1
            for c in range(C):
                top = (1.0 - fx) * src[y0, x0, c] + fx * src[y0, x1, c]
                bot = (1.0 - fx) * src[y1, x0, c] + fx * src[y1, x1, c]
                out[y, x, c] = <float>((1.0 - fy) * top + fy * bot)
    return out_arr


def box_blur(const float[:, :, ::1] src, int rx, int ry):
    """Separable box blur with radii ``rx`` (columns) and ``ry`` (rows), edge clamped."""
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1], C = src.shape[2]
    tmp_arr = np.empty((H, W, C), dtype=np.float64)
    out_arr = np.empty((H, W, C), dtype=np.float32)
    cdef double[:, :, ::1] tmp = tmp_arr
    cdef float[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, c, k, j
    cdef double acc
    cdef double nx = 2 * rx + 1, ny = 2 * ry + 1
    for y in range(H):
        for x in range(W):
            for c in range(C):
                acc = 0.0
                for k in range(-rx, rx + 1):
                    j = x + k
                    if j < 0:
                        j = 0
                    elif j > W - 1:
                        j = W - 1
                    acc = acc + src[y, j, c]
                tmp[y, x, c] = acc / nx
    for y in range(H):
        for x in range(W):
            for c in range(C):
                acc = 0.0
                for k in range(-ry, ry + 1):
                    j = y + k
                    if j < 0:
                        j = 0
                    elif j > H - 1:
                        j = H - 1
                    acc = acc + tmp[j, x, c]
                out[y, x, c] = <float>(acc / ny)
    return out_arr


def composite(const float[:, :, ::1] a, const float[:, :, ::1] b,
              const float[:, ::1] alpha, double gain_a, double gain_b,
              double offset, double light, const float[:, ::1] light_map):
    """``clip(gain_a*(1-alpha)*a + gain_b*alpha*b + offset + light*light_map, 0, 1)``."""
    cdef Py_ssize_t H = a.shape[0], W = a.shape[1], C = a.shape[2]
    out_arr = np.empty((H, W, C), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, c
    cdef double al, wa, wb, add, v
    for y in range(H):
        for x in range(W):
            al = alpha[y, x]
            wa = gain_a * (1.0 - al)
            wb = gain_b * al
            add = light * light_map[y, x]
            for c in range(C):
                v = wa * a[y, x, c] + wb * b[y, x, c] + offset + add
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                out[y, x, c] = <float>v
    return out_arr
