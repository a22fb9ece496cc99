"""Resampling kernels: compiled extension when available, numpy fallback otherwise.

Both implementations compute the same double-precision expressions, so
they produce identical rasters. Set CHARTROLE_PURE_PYTHON=1 to force the
numpy path; `active_backend()` reports which one is in use.
"""

from __future__ import annotations

import os

from chartrole.kernels import _rotate_np

_backend = "numpy"
_resample = _rotate_np.resample_affine

if os.environ.get("CHARTROLE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from chartrole.kernels import _rotate_cy

        _resample = _rotate_cy.resample_affine
        _backend = "compiled"
    except ImportError:
        pass


def active_backend() -> str:
    return _backend


def resample_affine(img, out_h, out_w, cos_t, sin_t, tx, ty, cx, cy, fill):
    """Inverse-map `img` through a rotation about (cx, cy) into an out_h x out_w canvas.

    (tx, ty) translate output coordinates back into the centered source frame;
    `fill` is the RGB value used outside the source canvas.
    """
    return _resample(img, out_h, out_w, cos_t, sin_t, tx, ty, cx, cy, fill)


def backends() -> dict:
    """All importable backends, keyed by name. Used by the benchmark and parity tests."""
    found = {"numpy": _rotate_np.resample_affine}
    try:
        from chartrole.kernels import _rotate_cy

        found["compiled"] = _rotate_cy.resample_affine
    except ImportError:
        pass
    return found
