"""Numba kernels for the fan-beam Joseph projector.

Both kernels trace the same rays with the same interpolation weights, so
the back projector is the exact matrix transpose of the forward one.
The back projector accumulates into a fixed number of view groups
(independent of the thread count) and sums them in a fixed order, which
keeps results bit-identical across thread configurations.
"""

import math

import numpy as np
from numba import njit, prange

# Number of view groups in the parallel back projector. Fixed (not tied
# to the thread count) so that summation order, and hence the result,
# is reproducible.
BACKPROJ_GROUPS = 16


@njit(cache=True, inline="always")
def _trace_ray_forward(img, n, half, inv_pitch, sx, sy, px, py):
    """Line integral along one ray using Joseph interpolation.

    Steps along the dominant axis; linear interpolation along the other.
    `half` is (n - 1) / 2 and `inv_pitch` is 1 / pixel_pitch; source and
    detector endpoints are given in pixel units relative to the image
    center.
    """
    dx = px - sx
    dy = py - sy
    acc = 0.0
    if abs(dx) >= abs(dy):
        if dx == 0.0:
            return 0.0
        slope = dy / dx
        step = math.sqrt(1.0 + slope * slope) / inv_pitch
        for i in range(n):
            xc = i - half
            t = (xc - sx) / dx
            if t < 0.0 or t > 1.0:
                continue
            rr = sy + (xc - sx) * slope + half
            j0 = int(math.floor(rr))
            f = rr - j0
            if 0 <= j0 < n - 1:
                acc += (1.0 - f) * img[j0, i] + f * img[j0 + 1, i]
            elif j0 == -1:
                acc += f * img[0, i]
            elif j0 == n - 1:
                acc += (1.0 - f) * img[n - 1, i]
        return acc * step
    else:
        if dy == 0.0:
            return 0.0
        slope = dx / dy
        step = math.sqrt(1.0 + slope * slope) / inv_pitch
        for j in range(n):
            yc = j - half
            t = (yc - sy) / dy
            if t < 0.0 or t > 1.0:
                continue
            cc = sx + (yc - sy) * slope + half
            i0 = int(math.floor(cc))
            f = cc - i0
            if 0 <= i0 < n - 1:
                acc += (1.0 - f) * img[j, i0] + f * img[j, i0 + 1]
            elif i0 == -1:
                acc += f * img[j, 0]
            elif i0 == n - 1:
                acc += (1.0 - f) * img[j, n - 1]
        return acc * step


@njit(cache=True, inline="always")
def _trace_ray_back(img, n, half, inv_pitch, sx, sy, px, py, val):
    """Scatter `val` along one ray with the forward kernel's weights."""
    dx = px - sx
    dy = py - sy
    if abs(dx) >= abs(dy):
        if dx == 0.0:
            return
        slope = dy / dx
        step = math.sqrt(1.0 + slope * slope) / inv_pitch
        v = val * step
        for i in range(n):
            xc = i - half
            t = (xc - sx) / dx
            if t < 0.0 or t > 1.0:
                continue
            rr = sy + (xc - sx) * slope + half
            j0 = int(math.floor(rr))
            f = rr - j0
            if 0 <= j0 < n - 1:
                img[j0, i] += (1.0 - f) * v
                img[j0 + 1, i] += f * v
            elif j0 == -1:
                img[0, i] += f * v
            elif j0 == n - 1:
                img[n - 1, i] += (1.0 - f) * v
    else:
        if dy == 0.0:
            return
        slope = dx / dy
        step = math.sqrt(1.0 + slope * slope) / inv_pitch
        v = val * step
        for j in range(n):
            yc = j - half
            t = (yc - sy) / dy
            if t < 0.0 or t > 1.0:
                continue
            cc = sx + (yc - sy) * slope + half
            i0 = int(math.floor(cc))
            f = cc - i0
            if 0 <= i0 < n - 1:
                img[j, i0] += (1.0 - f) * v
                img[j, i0 + 1] += f * v
            elif i0 == -1:
                img[j, 0] += f * v
            elif i0 == n - 1:
                img[j, n - 1] += (1.0 - f) * v


@njit(cache=True, parallel=True)
def fan_forward(img, cos_b, sin_b, num_det, det_pitch, s2c, s2d, pixel_pitch):
    """Fan-beam forward projection, parallel over views."""
    n = img.shape[0]
    num_views = cos_b.shape[0]
    half = (n - 1) / 2.0
    inv_pitch = 1.0 / pixel_pitch
    det_half = (num_det - 1) / 2.0
    sino = np.zeros((num_views, num_det), dtype=np.float64)
    for v in prange(num_views):
        cb = cos_b[v]
        sb = sin_b[v]
        # source and detector-center positions in pixel units
        sx = s2c * cb * inv_pitch
        sy = s2c * sb * inv_pitch
        ccx = (s2c - s2d) * cb * inv_pitch
        ccy = (s2c - s2d) * sb * inv_pitch
        for u in range(num_det):
            t = (u - det_half) * det_pitch * inv_pitch
            px = ccx - t * sb
            py = ccy + t * cb
            sino[v, u] = _trace_ray_forward(
                img, n, half, inv_pitch, sx, sy, px, py
            )
    return sino


@njit(cache=True, parallel=True)
def fan_back(sino, cos_b, sin_b, n, det_pitch, s2c, s2d, pixel_pitch):
    """Exact adjoint of :func:`fan_forward`, parallel over view groups."""
    num_views, num_det = sino.shape
    half = (n - 1) / 2.0
    inv_pitch = 1.0 / pixel_pitch
    det_half = (num_det - 1) / 2.0
    groups = min(BACKPROJ_GROUPS, num_views)
    acc = np.zeros((groups, n, n), dtype=np.float64)
    for g in prange(groups):
        for v in range(g, num_views, groups):
            cb = cos_b[v]
            sb = sin_b[v]
            sx = s2c * cb * inv_pitch
            sy = s2c * sb * inv_pitch
            ccx = (s2c - s2d) * cb * inv_pitch
            ccy = (s2c - s2d) * sb * inv_pitch
            for u in range(num_det):
                val = sino[v, u]
                if val == 0.0:
                    continue
                t = (u - det_half) * det_pitch * inv_pitch
                px = ccx - t * sb
                py = ccy + t * cb
                _trace_ray_back(
                    acc[g], n, half, inv_pitch, sx, sy, px, py, val
                )
    img = np.zeros((n, n), dtype=np.float64)
    for g in range(groups):
        img += acc[g]
    return img
