import math

import pytest

from mmray.scene import (
    BUILDERS, CEILING_EPS_R, CONCRETE_EPS_R, MARBLE_EPS_R, METAL,
    WALL_BLEND_EPS_R, CenterlineSegment, Environment, Material, ObstacleSlab,
    Surface, build_bent_tunnel, build_obstacle_corridor, build_plain_corridor,
    build_straight_tunnel, default_corridor_obstacles, free_space,
    validate_environment,
)


# ---------------------------------------------------------------------------
# Materials
# ---------------------------------------------------------------------------

def test_material_rejects_sub_unity_permittivity():
    with pytest.raises(ValueError):
        Material("bogus", 0.5)


def test_conductor_ignores_permittivity_floor():
    assert METAL.is_conductor
    # conductors may carry a placeholder eps_r
    Material("pec", eps_r=0.0, is_conductor=True)


def test_material_rejects_negative_conductivity():
    with pytest.raises(ValueError):
        Material("bad", 2.0, conductivity=-1.0)


def test_wall_blend_value():
    assert WALL_BLEND_EPS_R == pytest.approx((4.44 + 5.0) / 2.0)


# ---------------------------------------------------------------------------
# Surfaces
# ---------------------------------------------------------------------------

def test_surface_normal_and_containment():
    s = Surface("floor", (0.0, -1.0, 0.0), (10.0, 0.0, 0.0), (0.0, 2.0, 0.0),
                Material("concrete", 5.0))
    assert s.normal == (0.0, 0.0, 1.0)
    assert s.plane_offset == 0.0
    assert s.contains((5.0, 0.0, 0.0))
    assert s.contains((0.0, -1.0, 0.0))          # corner
    assert not s.contains((10.1, 0.0, 0.0))      # past edge_u
    assert not s.contains((5.0, 1.1, 0.0))       # past edge_v


def test_surface_local_coords_roundtrip():
    s = Surface("wall", (1.0, 2.0, 0.0), (0.0, 4.0, 0.0), (0.0, 0.0, 3.0),
                Material("brick", 4.44))
    a, b = s.local_coords((1.0, 4.0, 1.5))
    assert a == pytest.approx(0.5)
    assert b == pytest.approx(0.5)


def test_obstacle_interval_and_validation():
    slab = ObstacleSlab("door", 10.0, 0.1, Material("wood", 3.3))
    assert slab.interval == (10.0, 10.1)
    with pytest.raises(ValueError):
        ObstacleSlab("flat", 10.0, 0.0, METAL)


# ---------------------------------------------------------------------------
# Builders: dimensions and materials
# ---------------------------------------------------------------------------

def test_plain_corridor_dimensions():
    env = build_plain_corridor()
    assert env.axis_length == 44.0
    assert env.width == 2.20
    assert env.height == 2.75
    assert len(env.surfaces) == 4
    assert env.obstacles == ()
    mats = {s.name: s.material for s in env.surfaces}
    assert mats["floor"].eps_r == MARBLE_EPS_R
    assert mats["ceiling"].eps_r == CEILING_EPS_R
    assert mats["left_wall"].eps_r == WALL_BLEND_EPS_R
    assert mats["right_wall"].eps_r == WALL_BLEND_EPS_R


def test_corridor_split_walls():
    env = build_plain_corridor(split_walls=True)
    mats = {s.name: s.material.eps_r for s in env.surfaces}
    assert mats["left_wall"] == 4.44
    assert mats["right_wall"] == 5.0


def test_obstacle_corridor_has_three_slabs():
    env = build_obstacle_corridor()
    names = [o.name for o in env.obstacles]
    assert names == ["wooden_door", "lift", "glass_door"]
    positions = [o.position for o in env.obstacles]
    assert positions == [10.0, 20.0, 30.0]
    lift = env.obstacles[1]
    assert lift.material.is_conductor
    assert env.obstacles[0].material.eps_r == 3.3
    assert env.obstacles[2].material.eps_r == 6.0


def test_straight_tunnel_all_concrete():
    env = build_straight_tunnel()
    assert env.axis_length == 44.0
    assert env.width == 2.5 and env.height == 2.5
    assert all(s.material.eps_r == CONCRETE_EPS_R for s in env.surfaces)
    assert len(env.surfaces) == 4


def test_inward_normals_point_at_centerline():
    env = build_straight_tunnel()
    mid = (22.0, 0.0, 1.25)
    for s in env.surfaces:
        # walking from the surface along its normal must approach the axis
        from mmray.geometry import add, distance, scale
        start = s.origin
        closer = add(start, scale(s.normal, 0.1))
        assert distance(closer, mid) < distance(start, mid)


def test_free_space_contains_everything():
    env = free_space()
    assert env.contains((1e6, -1e6, 1e6))
    assert env.surfaces == ()


# ---------------------------------------------------------------------------
# Bent tunnel joint geometry
# ---------------------------------------------------------------------------

def test_bent_tunnel_miter_extension():
    env = build_bent_tunnel(45.0)
    ext = 1.25 * math.tan(math.radians(22.5))
    assert ext == pytest.approx(0.51777, abs=1e-5)
    names = {s.name: s for s in env.surfaces}

    def max_x(surface):
        o, u, v = surface.origin, surface.edge_u, surface.edge_v
        return max(o[0], o[0] + u[0], o[0] + v[0], o[0] + u[0] + v[0])

    # inner wall (left) stops short of the elbow, outer wall runs past it
    assert max_x(names["a_left_wall"]) == pytest.approx(22.0 - ext)
    assert max_x(names["a_right_wall"]) == pytest.approx(22.0 + ext)


def test_bent_tunnel_centerline():
    env = build_bent_tunnel(45.0)
    assert len(env.centerline) == 2
    assert env.axis_length == 44.0
    # arclength 22 is the elbow; past it the axis heads 45 degrees off +x
    d = env.axis_direction(30.0)
    assert d[0] == pytest.approx(math.cos(math.radians(45.0)))
    assert d[1] == pytest.approx(math.sin(math.radians(45.0)))
    p = env.axis_point(44.0, height=1.5)
    assert p[2] == pytest.approx(1.5)


def test_bent_tunnel_rejects_degenerate_angles():
    with pytest.raises(ValueError):
        build_bent_tunnel(0.0)
    with pytest.raises(ValueError):
        build_bent_tunnel(90.0)
    build_bent_tunnel(0.0001)
    build_bent_tunnel(89.999)


def test_bent_tunnel_contains_both_arms():
    env = build_bent_tunnel(45.0)
    assert env.contains((10.0, 0.0, 1.0))
    beta = math.radians(45.0)
    far = (22.0 + 15.0 * math.cos(beta), 15.0 * math.sin(beta), 1.0)
    assert env.contains(far)
    # a point straight ahead past the elbow leaves the duct
    assert not env.contains((40.0, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Containment semantics
# ---------------------------------------------------------------------------

def test_contains_is_transverse_strict_axial_closed():
    env = build_straight_tunnel()
    assert env.contains((0.0, 0.0, 2.0))        # on the start face: inside
    assert env.contains((44.0, 0.0, 1.5))       # on the end face: inside
    assert not env.contains((10.0, 1.25, 1.0))  # on a wall plane: outside
    assert not env.contains((10.0, 0.0, 0.0))   # on the floor: outside
    assert not env.contains((10.0, 0.0, 2.5))   # on the ceiling: outside
    assert not env.contains((-0.5, 0.0, 1.0))
    assert not env.contains((44.5, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_validate_clean(name):
    report = validate_environment(BUILDERS[name]())
    assert report.ok, report.violations


def test_validation_flags_skewed_surface():
    env = build_straight_tunnel()
    bad = Surface("skewed", (0.0, -1.25, 0.0), (44.0, 0.0, 0.0),
                  (0.3, 2.5, 0.0), Material("concrete", 5.0))
    broken = Environment(
        name=env.name,
        surfaces=env.surfaces[:1] + (bad,) + env.surfaces[2:],
        obstacles=env.obstacles,
        centerline=env.centerline,
        width=env.width,
        height=env.height,
        axis_length=env.axis_length,
    )
    report = validate_environment(broken)
    assert not report.ok


def test_validation_flags_overlapping_obstacles():
    env = build_obstacle_corridor(obstacles=(
        ObstacleSlab("one", 10.0, 0.5, METAL),
        ObstacleSlab("two", 10.2, 0.5, METAL),
    ))
    report = validate_environment(env)
    assert any("overlap" in v for v in report.violations)


def test_cross_section_closure_probe():
    """A transverse ray from the axis midpoint must exit through exactly
    one surface in every direction (closed rectangular cross-section)."""
    env = build_straight_tunnel()
    report = validate_environment(env)
    assert report.ok
