"""Minimal 3D vector algebra on plain float triples.

The tracer enumerates thousands of candidate paths per receiver position,
so these helpers work on tuples of floats rather than numpy arrays to
avoid per-call array allocation. Numpy interop happens at API boundaries.
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

Vec3 = Tuple[float, float, float]


def vec3(p: Sequence[float]) -> Vec3:
    """Coerce any length-3 sequence to a float tuple."""
    return (float(p[0]), float(p[1]), float(p[2]))


def add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def neg(a: Vec3) -> Vec3:
    return (-a[0], -a[1], -a[2])


def dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def norm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def unit(a: Vec3) -> Vec3:
    n = norm(a)
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


def distance(a: Vec3, b: Vec3) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def lerp(a: Vec3, b: Vec3, t: float) -> Vec3:
    return (
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    )


def mirror_across_plane(p: Vec3, normal: Vec3, offset: float) -> Vec3:
    """Reflect p across the plane {x : normal . x = offset}; normal must be unit."""
    s = 2.0 * (dot(normal, p) - offset)
    return (p[0] - s * normal[0], p[1] - s * normal[1], p[2] - s * normal[2])


def segment_plane_parameter(a: Vec3, b: Vec3, normal: Vec3, offset: float,
                            parallel_eps: float = 1e-12) -> float | None:
    """Parameter t with a + t*(b-a) on the plane, or None if near-parallel.

    The caller decides which t range counts as a hit.
    """
    da = dot(normal, a) - offset
    db = dot(normal, b) - offset
    denom = da - db
    if abs(denom) < parallel_eps:
        return None
    return da / denom
