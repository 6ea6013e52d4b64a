"""Duct-shaped indoor propagation environments.

An Environment is a set of finite rectangular reflecting surfaces plus
optional transverse obstacle slabs, arranged along a piecewise-straight
centerline. Four builders cover the studied geometries: a plain corridor,
the same corridor with door/lift slabs, a straight concrete tunnel, and a
tunnel with a single horizontal bend.

Coordinates: x runs along the (first) duct axis, y is transverse
horizontal, z is up. The floor of every duct sits at z = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

from .geometry import (
    Vec3,
    add,
    cross,
    dot,
    norm,
    scale,
    sub,
    unit,
    vec3,
)

# Default material parameters for the built-in scenes.
BRICK_EPS_R = 4.44
PLASTERBOARD_EPS_R = 5.0
WALL_BLEND_EPS_R = (BRICK_EPS_R + PLASTERBOARD_EPS_R) / 2.0  # 4.72
MARBLE_EPS_R = 4.0
CEILING_EPS_R = 1.0
CONCRETE_EPS_R = 5.0
WOOD_EPS_R = 3.3
GLASS_EPS_R = 6.0  # not measured for these scenes; common architectural value


@dataclass(frozen=True)
class Material:
    """Electromagnetic description of a reflecting surface or slab."""

    name: str
    eps_r: float
    conductivity: float = 0.0
    is_conductor: bool = False

    def __post_init__(self) -> None:
        if not self.is_conductor and self.eps_r < 1.0:
            raise ValueError(f"material {self.name!r}: eps_r must be >= 1, got {self.eps_r}")
        if self.conductivity < 0.0:
            raise ValueError(f"material {self.name!r}: conductivity must be >= 0")


METAL = Material("metal", eps_r=1.0, is_conductor=True)


@dataclass(frozen=True)
class Surface:
    """Finite planar rectangle spanned by two orthogonal edge vectors.

    The inward normal is unit(edge_u x edge_v); builders orient the edges
    so it points into the duct interior.
    """

    name: str
    origin: Vec3
    edge_u: Vec3
    edge_v: Vec3
    material: Material

    @cached_property
    def normal(self) -> Vec3:
        return unit(cross(self.edge_u, self.edge_v))

    @cached_property
    def plane_offset(self) -> float:
        return dot(self.normal, self.origin)

    @cached_property
    def _edge_norms_sq(self) -> Tuple[float, float]:
        u, v = self.edge_u, self.edge_v
        return (dot(u, u), dot(v, v))

    def local_coords(self, p: Vec3) -> Tuple[float, float]:
        """Barycentric coordinates along edge_u / edge_v, in [0, 1] on the rectangle."""
        rel = sub(p, self.origin)
        lu2, lv2 = self._edge_norms_sq
        return (dot(rel, self.edge_u) / lu2, dot(rel, self.edge_v) / lv2)

    def contains(self, p: Vec3, tol: float = 1e-9) -> bool:
        a, b = self.local_coords(p)
        return -tol <= a <= 1.0 + tol and -tol <= b <= 1.0 + tol


@dataclass(frozen=True)
class ObstacleSlab:
    """Transverse slab filling the full duct cross-section.

    position is measured along the first centerline segment; the slab
    occupies [position, position + thickness].
    """

    name: str
    position: float
    thickness: float
    material: Material

    def __post_init__(self) -> None:
        if self.thickness <= 0.0:
            raise ValueError(f"slab {self.name!r}: thickness must be > 0")

    @property
    def interval(self) -> Tuple[float, float]:
        return (self.position, self.position + self.thickness)


@dataclass(frozen=True)
class CenterlineSegment:
    """One straight piece of the duct centerline, at floor level."""

    origin: Vec3
    direction: Vec3  # unit, horizontal
    length: float
    # Longitudinal overhang of the cross-section box at each end, used by
    # point-containment tests around mitered joints.
    ext_before: float = 0.0
    ext_after: float = 0.0


@dataclass(frozen=True)
class Environment:
    """Immutable scene: reflecting surfaces, obstacle slabs, centerline."""

    name: str
    surfaces: Tuple[Surface, ...]
    obstacles: Tuple[ObstacleSlab, ...]
    centerline: Tuple[CenterlineSegment, ...]
    width: float
    height: float
    axis_length: float

    def axis_point(self, s: float, height: float = 0.0) -> Vec3:
        """Point at arclength s along the centerline, lifted to the given height."""
        remaining = s
        for seg in self.centerline:
            if remaining <= seg.length or seg is self.centerline[-1]:
                p = add(seg.origin, scale(seg.direction, remaining))
                return (p[0], p[1], p[2] + height)
            remaining -= seg.length
        raise ValueError(f"arclength {s} beyond centerline")

    def axis_direction(self, s: float) -> Vec3:
        remaining = s
        for seg in self.centerline:
            if remaining <= seg.length or seg is self.centerline[-1]:
                return seg.direction
            remaining -= seg.length
        return self.centerline[-1].direction

    def contains(self, p: Vec3, tol: float = 1e-9) -> bool:
        """True if p lies inside the duct volume.

        Transverse bounds are strict; the longitudinal interval is closed
        (the duct ends are open, so points on an end face count as inside).
        An environment with no surfaces is unbounded free space.
        """
        if not self.surfaces:
            return True
        half_w = self.width / 2.0
        for seg in self.centerline:
            rel = sub(p, seg.origin)
            u = dot(rel, seg.direction)
            if u < -seg.ext_before - tol or u > seg.length + seg.ext_after + tol:
                continue
            left = (-seg.direction[1], seg.direction[0], 0.0)
            v = dot(rel, left)
            if abs(v) < half_w - tol and tol < p[2] < self.height - tol:
                return True
        return False


@dataclass
class ValidationReport:
    """List of invariant violations found in an environment (empty = valid)."""

    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)


# ---------------------------------------------------------------------------
# Duct assembly
# ---------------------------------------------------------------------------

def _duct_segment_surfaces(prefix: str,
                           origin: Vec3,
                           direction: Vec3,
                           width: float,
                           height: float,
                           span: Tuple[float, float],
                           floor_mat: Material,
                           ceiling_mat: Material,
                           left_mat: Material,
                           right_mat: Material,
                           left_span: Optional[Tuple[float, float]] = None,
                           right_span: Optional[Tuple[float, float]] = None) -> list:
    """Four rectangles of one straight duct piece, inward normals.

    span is the longitudinal interval (local u) covered by floor and
    ceiling; the side walls may use different intervals (mitered joints).
    """
    d = unit(direction)
    left = (-d[1], d[0], 0.0)
    up = (0.0, 0.0, 1.0)
    half_w = width / 2.0
    left_span = left_span or span
    right_span = right_span or span

    def at(u: float, v: float, z: float) -> Vec3:
        return (
            origin[0] + u * d[0] + v * left[0],
            origin[1] + u * d[1] + v * left[1],
            origin[2] + z,
        )

    u0, u1 = span
    lu0, lu1 = left_span
    ru0, ru1 = right_span
    return [
        # floor: normal +z
        Surface(f"{prefix}floor", at(u0, -half_w, 0.0),
                scale(d, u1 - u0), scale(left, width), floor_mat),
        # ceiling: normal -z
        Surface(f"{prefix}ceiling", at(u0, -half_w, height),
                scale(left, width), scale(d, u1 - u0), ceiling_mat),
        # left wall (v = +w/2): normal points right, into the duct
        Surface(f"{prefix}left_wall", at(lu0, half_w, 0.0),
                scale(d, lu1 - lu0), scale(up, height), left_mat),
        # right wall (v = -w/2): normal points left
        Surface(f"{prefix}right_wall", at(ru0, -half_w, 0.0),
                scale(up, height), scale(d, ru1 - ru0), right_mat),
    ]


def _straight_env(name: str, length: float, width: float, height: float,
                  floor_mat: Material, ceiling_mat: Material,
                  left_mat: Material, right_mat: Material,
                  obstacles: Sequence[ObstacleSlab] = ()) -> Environment:
    origin = (0.0, 0.0, 0.0)
    axis = (1.0, 0.0, 0.0)
    surfaces = _duct_segment_surfaces("", origin, axis, width, height,
                                      (0.0, length), floor_mat, ceiling_mat,
                                      left_mat, right_mat)
    return Environment(
        name=name,
        surfaces=tuple(surfaces),
        obstacles=tuple(obstacles),
        centerline=(CenterlineSegment(origin, axis, length),),
        width=width,
        height=height,
        axis_length=length,
    )


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_plain_corridor(length: float = 44.0,
                         width: float = 2.20,
                         height: float = 2.75,
                         wall_eps_r: float = WALL_BLEND_EPS_R,
                         floor_eps_r: float = MARBLE_EPS_R,
                         ceiling_eps_r: float = CEILING_EPS_R,
                         split_walls: bool = False,
                         ceiling_is_conductor: bool = False) -> Environment:
    """Plain corridor: marble floor, light furred ceiling, brick/plaster walls.

    By default the two side walls share a single blended permittivity;
    split_walls assigns brick to the left wall and plasterboard to the right.
    """
    floor = Material("marble", floor_eps_r)
    ceiling = Material("ceiling", ceiling_eps_r, is_conductor=ceiling_is_conductor)
    if split_walls:
        left = Material("brick", BRICK_EPS_R)
        right = Material("plasterboard", PLASTERBOARD_EPS_R)
    else:
        left = right = Material("wall_blend", wall_eps_r)
    return _straight_env("plain_corridor", length, width, height,
                         floor, ceiling, left, right)


def default_corridor_obstacles(wood_eps_r: float = WOOD_EPS_R,
                               glass_eps_r: float = GLASS_EPS_R,
                               thickness: float = 0.1) -> Tuple[ObstacleSlab, ...]:
    """Wooden door at 10 m, metal lift at 20 m, glass door at 30 m."""
    return (
        ObstacleSlab("wooden_door", 10.0, thickness, Material("wood", wood_eps_r)),
        ObstacleSlab("lift", 20.0, thickness, METAL),
        ObstacleSlab("glass_door", 30.0, thickness, Material("glass", glass_eps_r)),
    )


def build_obstacle_corridor(length: float = 44.0,
                            width: float = 2.20,
                            height: float = 2.75,
                            wall_eps_r: float = WALL_BLEND_EPS_R,
                            floor_eps_r: float = MARBLE_EPS_R,
                            ceiling_eps_r: float = CEILING_EPS_R,
                            split_walls: bool = False,
                            ceiling_is_conductor: bool = False,
                            wood_eps_r: float = WOOD_EPS_R,
                            glass_eps_r: float = GLASS_EPS_R,
                            obstacles: Optional[Sequence[ObstacleSlab]] = None) -> Environment:
    """Plain corridor plus three full-cross-section slabs (door, lift, door)."""
    base = build_plain_corridor(length, width, height, wall_eps_r, floor_eps_r,
                                ceiling_eps_r, split_walls, ceiling_is_conductor)
    if obstacles is None:
        obstacles = default_corridor_obstacles(wood_eps_r, glass_eps_r)
    return replace(base, name="obstacle_corridor", obstacles=tuple(obstacles))


def build_straight_tunnel(length: float = 44.0,
                          width: float = 2.5,
                          height: float = 2.5,
                          eps_r: float = CONCRETE_EPS_R) -> Environment:
    """Straight concrete tunnel with a square cross-section."""
    concrete = Material("concrete", eps_r)
    return _straight_env("straight_tunnel", length, width, height,
                         concrete, concrete, concrete, concrete)


def build_bent_tunnel(bend_angle_deg: float = 45.0,
                      length: float = 44.0,
                      width: float = 2.5,
                      height: float = 2.5,
                      eps_r: float = CONCRETE_EPS_R) -> Environment:
    """Concrete tunnel with one horizontal bend halfway along the centerline.

    The bend is a mitered joint of two straight duct pieces: the side walls
    of both pieces stop exactly at their mutual intersection line, while the
    coplanar floor/ceiling rectangles of the two pieces overlap across the
    elbow wedge (the tracer deduplicates reflections found through both).
    """
    if not 0.0 < bend_angle_deg < 90.0:
        raise ValueError(f"bend angle must be in (0, 90) degrees, got {bend_angle_deg}")
    beta = math.radians(bend_angle_deg)
    half = length / 2.0
    half_w = width / 2.0
    # Longitudinal reach of the miter past/short of the elbow point.
    ext = half_w * math.tan(beta / 2.0)

    concrete = Material("concrete", eps_r)
    o1 = (0.0, 0.0, 0.0)
    d1 = (1.0, 0.0, 0.0)
    elbow = (half, 0.0, 0.0)
    d2 = (math.cos(beta), math.sin(beta), 0.0)  # turn toward +y: left wall is inner

    seg1 = _duct_segment_surfaces(
        "a_", o1, d1, width, height, (0.0, half + ext),
        concrete, concrete, concrete, concrete,
        left_span=(0.0, half - ext),   # inner wall stops before the elbow
        right_span=(0.0, half + ext),  # outer wall runs past it
    )
    seg2 = _duct_segment_surfaces(
        "b_", elbow, d2, width, height, (-ext, half),
        concrete, concrete, concrete, concrete,
        left_span=(ext, half),
        right_span=(-ext, half),
    )
    return Environment(
        name="bent_tunnel",
        surfaces=tuple(seg1 + seg2),
        obstacles=(),
        centerline=(
            CenterlineSegment(o1, d1, half, ext_after=ext),
            CenterlineSegment(elbow, d2, half, ext_before=ext),
        ),
        width=width,
        height=height,
        axis_length=length,
    )


def free_space(length: float = 44.0) -> Environment:
    """Unbounded environment with no reflectors; direct ray only."""
    return Environment(
        name="free_space",
        surfaces=(),
        obstacles=(),
        centerline=(CenterlineSegment((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), length),),
        width=math.inf,
        height=math.inf,
        axis_length=length,
    )


BUILDERS = {
    "plain_corridor": build_plain_corridor,
    "obstacle_corridor": build_obstacle_corridor,
    "straight_tunnel": build_straight_tunnel,
    "bent_tunnel": build_bent_tunnel,
    "free_space": free_space,
}


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _nearest_centerline_point(env: Environment, p: Vec3, height: float) -> Vec3:
    best = None
    best_d2 = math.inf
    for seg in env.centerline:
        rel = sub(p, seg.origin)
        u = min(max(dot(rel, seg.direction), 0.0), seg.length)
        q = add(seg.origin, scale(seg.direction, u))
        q = (q[0], q[1], q[2] + height)
        d2 = sum((p[i] - q[i]) ** 2 for i in range(3))
        if d2 < best_d2:
            best_d2 = d2
            best = q
    return best


def _ray_hits(env: Environment, start: Vec3, direction: Vec3) -> list:
    """Sorted distances at which a ray from start hits any surface rectangle."""
    hits = []
    for surf in env.surfaces:
        n = surf.normal
        denom = dot(n, direction)
        if abs(denom) < 1e-12:
            continue
        t = (surf.plane_offset - dot(n, start)) / denom
        if t <= 1e-9:
            continue
        p = add(start, scale(direction, t))
        if surf.contains(p, tol=1e-9):
            hits.append(t)
    return sorted(hits)


def validate_environment(env: Environment,
                         n_stations: int = 48) -> ValidationReport:
    """Check scene invariants; returns a report of violations (empty = valid)."""
    report = ValidationReport()

    for surf in env.surfaces:
        if abs(dot(surf.edge_u, surf.edge_v)) > 1e-9:
            report.add(f"surface {surf.name!r}: edge vectors not orthogonal")
            continue
        if abs(norm(surf.normal) - 1.0) > 1e-12:
            report.add(f"surface {surf.name!r}: normal not unit length")
        centroid = add(surf.origin,
                       add(scale(surf.edge_u, 0.5), scale(surf.edge_v, 0.5)))
        inward_ref = _nearest_centerline_point(env, centroid, env.height / 2.0
                                               if math.isfinite(env.height) else 0.0)
        if inward_ref is not None:
            if dot(surf.normal, sub(inward_ref, centroid)) <= 0.0:
                report.add(f"surface {surf.name!r}: normal does not point into the duct")

    spans = sorted((slab.interval, slab.name) for slab in env.obstacles)
    for (ivl_a, name_a), (ivl_b, name_b) in zip(spans, spans[1:]):
        if ivl_b[0] < ivl_a[1] - 1e-12:
            report.add(f"obstacles {name_a!r} and {name_b!r} overlap")
    for slab in env.obstacles:
        if not 0.0 <= slab.position <= env.axis_length:
            report.add(f"obstacle {slab.name!r}: position outside the duct axis")

    if env.surfaces and math.isfinite(env.height):
        mid = env.height / 2.0
        margin = min(0.1, env.axis_length / (2 * n_stations))
        for i in range(n_stations):
            s = margin + (env.axis_length - 2 * margin) * i / (n_stations - 1)
            start = env.axis_point(s, height=mid)
            d = env.axis_direction(s)
            left = (-d[1], d[0], 0.0)
            for label, direction in (("up", (0.0, 0.0, 1.0)),
                                     ("down", (0.0, 0.0, -1.0)),
                                     ("left", left),
                                     ("right", (-left[0], -left[1], 0.0))):
                hits = _ray_hits(env, start, direction)
                if not hits:
                    report.add(f"open cross-section at s={s:.2f} m looking {label}")
                    break
    return report
