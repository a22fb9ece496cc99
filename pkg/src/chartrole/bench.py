"""Timing comparison between the compiled and numpy resampling kernels."""

from __future__ import annotations

import time

import numpy as np

from chartrole import kernels
from chartrole.geometry import RotationTransform


def bench_rotation(size: int = 512, theta: float = 17.0, repeat: int = 5) -> dict:
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    tf = RotationTransform(theta, (size, size))
    out_w, out_h = tf.out_size
    ox, oy = tf.offset
    cx, cy = tf.center
    t = np.radians(theta)
    args = (out_h, out_w, float(np.cos(t)), float(np.sin(t)),
            ox + cx, oy + cy, cx, cy, (255, 255, 255))

    results = {}
    baseline = None
    for name, fn in kernels.backends().items():
        fn(img, *args)  # warm up
        best = min(_timed(fn, img, args) for _ in range(repeat))
        results[name] = {"ms": best * 1e3}
        if name == "numpy":
            baseline = best
    if baseline is not None:
        for name, rec in results.items():
            rec["speedup_vs_numpy"] = baseline / (rec["ms"] / 1e3)
    results["active"] = kernels.active_backend()
    return results


def _timed(fn, img, args) -> float:
    t0 = time.perf_counter()
    fn(img, *args)
    return time.perf_counter() - t0


def format_bench(results: dict) -> str:
    lines = [f"active backend: {results['active']}"]
    for name, rec in results.items():
        if name == "active":
            continue
        speed = rec.get("speedup_vs_numpy")
        extra = f"  ({speed:.1f}x vs numpy)" if speed else ""
        lines.append(f"  {name:<9} {rec['ms']:8.2f} ms{extra}")
    return "\n".join(lines)
