"""Vectorized numpy twin of the compiled resampling kernel.

Keep the arithmetic in lockstep with _rotate_cy.pyx: same source-coordinate
expressions, same double-precision bilinear blend, same rint rounding.
"""

from __future__ import annotations

import numpy as np


def resample_affine(img: np.ndarray, out_h: int, out_w: int,
                    cos_t: float, sin_t: float, tx: float, ty: float,
                    cx: float, cy: float, fill: tuple[int, int, int]) -> np.ndarray:
    h, w = img.shape[:2]
    jj, ii = np.meshgrid(np.arange(out_w, dtype=np.float64),
                         np.arange(out_h, dtype=np.float64))
    a = (jj + 0.5) - tx
    b = (ii + 0.5) - ty
    sx = cx + a * cos_t - b * sin_t
    sy = cy + a * sin_t + b * cos_t

    inside = (sx >= 0.0) & (sx <= w) & (sy >= 0.0) & (sy <= h)

    fx = np.clip(sx - 0.5, 0.0, w - 1.0)
    fy = np.clip(sy - 0.5, 0.0, h - 1.0)
    x0 = fx.astype(np.int64)
    y0 = fy.astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    ax = (fx - x0)[..., None]
    ay = (fy - y0)[..., None]

    p00 = img[y0, x0].astype(np.float64)
    p01 = img[y0, x1].astype(np.float64)
    p10 = img[y1, x0].astype(np.float64)
    p11 = img[y1, x1].astype(np.float64)
    val = (1.0 - ay) * ((1.0 - ax) * p00 + ax * p01) + ay * ((1.0 - ax) * p10 + ax * p11)

    out = np.rint(val).astype(np.uint8)
    out[~inside] = np.asarray(fill, dtype=np.uint8)
    return np.ascontiguousarray(out)
