# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inverse-mapping bilinear resampler.

Single pass over the output raster; arithmetic mirrors _rotate_np.py
expression for expression so both backends agree bit for bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport rint

cnp.import_array()


def resample_affine(const cnp.uint8_t[:, :, ::1] img, int out_h, int out_w,
                    double cos_t, double sin_t, double tx, double ty,
                    double cx, double cy, fill):
    cdef int h = img.shape[0]
    cdef int w = img.shape[1]
    cdef cnp.uint8_t fill_r = fill[0]
    cdef cnp.uint8_t fill_g = fill[1]
    cdef cnp.uint8_t fill_b = fill[2]

    out_arr = np.empty((out_h, out_w, 3), dtype=np.uint8)
    cdef cnp.uint8_t[:, :, ::1] out = out_arr

    cdef int i, j, ch, x0, y0, x1, y1
    cdef double a, b, sx, sy, fx, fy, ax, ay, val
    cdef double wmax = w - 1.0
    cdef double hmax = h - 1.0

    with nogil:
        for i in range(out_h):
            b = (i + 0.5) - ty
            for j in range(out_w):
                a = (j + 0.5) - tx
                sx = cx + a * cos_t - b * sin_t
                sy = cy + a * sin_t + b * cos_t
                if sx < 0.0 or sx > w or sy < 0.0 or sy > h:
                    out[i, j, 0] = fill_r
                    out[i, j, 1] = fill_g
                    out[i, j, 2] = fill_b
                    continue
                fx = sx - 0.5
                fy = sy - 0.5
                if fx < 0.0:
                    fx = 0.0
                elif fx > wmax:
                    fx = wmax
                if fy < 0.0:
                    fy = 0.0
                elif fy > hmax:
                    fy = hmax
                x0 = <int>fx
                y0 = <int>fy
                x1 = x0 + 1 if x0 + 1 < w else w - 1
                y1 = y0 + 1 if y0 + 1 < h else h - 1
                ax = fx - x0
                ay = fy - y0
                for ch in range(3):
                    val = (1.0 - ay) * ((1.0 - ax) * img[y0, x0, ch] + ax * img[y0, x1, ch]) \
                        + ay * ((1.0 - ax) * img[y1, x0, ch] + ax * img[y1, x1, ch])
                    out[i, j, ch] = <cnp.uint8_t>rint(val)
    return out_arr
