import math

import numpy as np
import pytest

from chartrole.geometry import (BoundingBox, BoxOutsideImageError, RotationTransform,
                                clamp_bbox)


def test_clamp_negative_origin_shrinks():
    assert clamp_bbox(-3, 5, 40, 20, (100, 50)) == BoundingBox(0, 5, 37, 20)


def test_clamp_identity_inside():
    assert clamp_bbox(10, 10, 20, 20, (100, 100)) == BoundingBox(10, 10, 20, 20)


def test_clamp_edge_clip():
    assert clamp_bbox(90, 90, 20, 20, (100, 100)) == BoundingBox(90, 90, 10, 10)


def test_clamp_rejects_fully_outside():
    with pytest.raises(BoxOutsideImageError):
        clamp_bbox(120, 10, 5, 5, (100, 100))
    with pytest.raises(BoxOutsideImageError):
        clamp_bbox(-50, -50, 20, 20, (100, 100))


def test_clamp_rejects_empty_extent():
    with pytest.raises(ValueError):
        clamp_bbox(5, 5, 0, 10, (100, 100))


def test_clamp_idempotent_on_random_boxes():
    rng = np.random.default_rng(0)
    for _ in range(300):
        w_img, h_img = rng.integers(20, 200, size=2)
        x, y = rng.uniform(-30, w_img - 1), rng.uniform(-30, h_img - 1)
        w, h = rng.uniform(0.5, 80), rng.uniform(0.5, 80)
        try:
            once = clamp_bbox(x, y, w, h, (w_img, h_img))
        except BoxOutsideImageError:
            continue
        twice = clamp_bbox(once.x, once.y, once.width, once.height, (w_img, h_img))
        assert once == twice


# rotation transform -----------------------------------------------------------

def _rotate_point_oracle(x, y, theta_deg, src_size):
    """Independent closed-form corner rotation into the expanded canvas."""
    w, h = src_size
    cx, cy = w / 2, h / 2
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    rx = cx + (x - cx) * c + (y - cy) * s
    ry = cy - (x - cx) * s + (y - cy) * c
    new_w = abs(w * c) + abs(h * s)
    new_h = abs(w * s) + abs(h * c)
    ow, oh = math.ceil(new_w - 1e-9), math.ceil(new_h - 1e-9)
    return rx + (ow / 2 - cx), ry + (oh / 2 - cy)


def test_rotation_out_size_theta0_and_90():
    assert RotationTransform(0.0, (100, 50)).out_size == (100, 50)
    assert RotationTransform(90.0, (100, 50)).out_size == (50, 100)
    assert RotationTransform(-90.0, (100, 50)).out_size == (50, 100)


def test_rotation_apply_matches_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        w, h = int(rng.integers(10, 300)), int(rng.integers(10, 300))
        theta = float(rng.uniform(-180, 180))
        x, y = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        tf = RotationTransform(theta, (w, h))
        got = tf.apply(x, y)
        want = _rotate_point_oracle(x, y, theta, (w, h))
        assert got == pytest.approx(want, abs=1e-9)


def test_rotation_invert_roundtrip():
    tf = RotationTransform(33.0, (120, 80))
    for x, y in [(0, 0), (120, 80), (60, 40), (7.5, 33.25)]:
        ax, ay = tf.apply(x, y)
        bx, by = tf.invert(ax, ay)
        assert (bx, by) == pytest.approx((x, y), abs=1e-9)


def test_rotation_map_bbox_90_matches_corner_oracle():
    # 100x100 canvas, bbox (10,10,20,10) rotated 90 degrees
    tf = RotationTransform(90.0, (100, 100))
    got = tf.map_bbox(BoundingBox(10, 10, 20, 10))
    corners = [(10, 10), (30, 10), (30, 20), (10, 20)]
    pts = [_rotate_point_oracle(x, y, 90.0, (100, 100)) for x, y in corners]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    assert got.x == pytest.approx(min(xs), abs=1e-9)
    assert got.y == pytest.approx(min(ys), abs=1e-9)
    assert got.width == pytest.approx(max(xs) - min(xs), abs=1e-9)
    assert got.height == pytest.approx(max(ys) - min(ys), abs=1e-9)


def test_rotation_map_bbox_contains_rotated_rect_points():
    rng = np.random.default_rng(9)
    for _ in range(100):
        w, h = int(rng.integers(40, 200)), int(rng.integers(40, 200))
        theta = float(rng.uniform(-30, 30))
        bb = BoundingBox(float(rng.uniform(0, w - 10)), float(rng.uniform(0, h - 10)),
                         float(rng.uniform(1, 10)), float(rng.uniform(1, 10)))
        bb = BoundingBox(bb.x, bb.y, min(bb.width, w - bb.x), min(bb.height, h - bb.y))
        tf = RotationTransform(theta, (w, h))
        out = tf.map_bbox(bb)
        for fx in (0, 0.3, 0.5, 1):
            for fy in (0, 0.25, 1):
                px, py = bb.x + fx * bb.width, bb.y + fy * bb.height
                qx, qy = tf.apply(px, py)
                assert out.x - 1e-6 <= qx <= out.x2 + 1e-6
                assert out.y - 1e-6 <= qy <= out.y2 + 1e-6


def test_rotation_there_and_back_preserves_centers():
    bb = BoundingBox(20, 30, 40, 12)
    tf = RotationTransform(23.0, (200, 100))
    mapped = tf.map_bbox(bb)
    back = RotationTransform(-23.0, tf.out_size).map_bbox(mapped)
    fwd = RotationTransform(-23.0, tf.out_size)
    # the original center, carried through both canvases
    cx1, cy1 = tf.apply(*bb.center)
    cx2, cy2 = fwd.apply(cx1, cy1)
    bx, by = back.center
    assert abs(bx - cx2) <= 0.5 and abs(by - cy2) <= 0.5
