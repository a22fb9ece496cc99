"""Bounding boxes and the rotation coordinate transform.

Boxes are axis-aligned (x, y, width, height) with the origin at the image
top-left and y growing downward. Angles are in degrees; a positive angle
rotates counterclockwise on screen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class BoxOutsideImageError(ValueError):
    """Raised when clamping would leave no area inside the image."""


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"box must have positive extent, got {self}")

    @property
    def x2(self) -> float:
        return self.x + self.width

    @property
    def y2(self) -> float:
        return self.y + self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.width / 2.0, self.y + self.height / 2.0)

    def corners(self) -> list[tuple[float, float]]:
        return [(self.x, self.y), (self.x2, self.y), (self.x2, self.y2), (self.x, self.y2)]

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundingBox":
        return cls(float(d["x"]), float(d["y"]), float(d["width"]), float(d["height"]))


def clamp_bbox(x: float, y: float, width: float, height: float,
               image_dims: tuple[float, float]) -> BoundingBox:
    """Clip a raw box into the image rectangle.

    Negative x/y are set to zero and the width/height shrunk by the same
    amount, then the right/bottom edges are clipped to the image bounds, so
    the result is the intersection of the raw box with the image.

    Raises BoxOutsideImageError when the intersection is empty.
    """
    if not (width > 0 and height > 0):
        raise ValueError(f"box must have positive extent before clamping: {(x, y, width, height)}")
    w_img, h_img = image_dims
    x1, y1 = max(x, 0.0), max(y, 0.0)
    x2, y2 = min(x + width, float(w_img)), min(y + height, float(h_img))
    if x2 <= x1 or y2 <= y1:
        raise BoxOutsideImageError(
            f"box {(x, y, width, height)} lies outside a {w_img}x{h_img} image")
    return BoundingBox(x1, y1, x2 - x1, y2 - y1)


@dataclass(frozen=True)
class RotationTransform:
    """Rotation of a W x H canvas about its center with canvas expansion.

    The output canvas tightly bounds the rotated original canvas, so no
    content is cropped. `apply` maps source coordinates into the expanded
    output canvas.
    """

    theta_deg: float
    src_size: tuple[int, int]  # (W, H)

    @property
    def center(self) -> tuple[float, float]:
        w, h = self.src_size
        return (w / 2.0, h / 2.0)

    def _trig(self) -> tuple[float, float]:
        t = math.radians(self.theta_deg)
        return math.cos(t), math.sin(t)

    @property
    def out_size(self) -> tuple[int, int]:
        w, h = self.src_size
        c, s = self._trig()
        new_w = abs(w * c) + abs(h * s)
        new_h = abs(w * s) + abs(h * c)
        return (int(math.ceil(new_w - 1e-9)), int(math.ceil(new_h - 1e-9)))

    @property
    def offset(self) -> tuple[float, float]:
        """Translation placing the rotated canvas center at the output center."""
        cx, cy = self.center
        ow, oh = self.out_size
        return (ow / 2.0 - cx, oh / 2.0 - cy)

    def apply(self, x: float, y: float) -> tuple[float, float]:
        """Map a source point into the output canvas."""
        cx, cy = self.center
        c, s = self._trig()
        # screen-CCW for positive theta with y pointing down
        rx = cx + (x - cx) * c + (y - cy) * s
        ry = cy - (x - cx) * s + (y - cy) * c
        ox, oy = self.offset
        return (rx + ox, ry + oy)

    def invert(self, x: float, y: float) -> tuple[float, float]:
        """Map an output-canvas point back to source coordinates."""
        ox, oy = self.offset
        cx, cy = self.center
        c, s = self._trig()
        ux, uy = x - ox, y - oy
        rx = cx + (ux - cx) * c - (uy - cy) * s
        ry = cy + (ux - cx) * s + (uy - cy) * c
        return (rx, ry)

    def map_bbox(self, bbox: BoundingBox) -> BoundingBox:
        """Axis-aligned hull of the four rotated corners, clamped to the output canvas."""
        pts = [self.apply(px, py) for px, py in bbox.corners()]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x1, y1, x2, y2 = min(xs), min(ys), max(xs), max(ys)
        return clamp_bbox(x1, y1, x2 - x1, y2 - y1, self.out_size)
