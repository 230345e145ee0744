import math

import numpy as np
import pytest

from littersim.geometry import (
    BoundingBox,
    CameraModel,
    CoincidentPoint,
    DegenerateDepth,
    GroundPoint,
    Pose2D,
    Side,
    angle_to,
    bearing_from_pixel,
    compose,
    distance,
    ground_point_to_pixel,
    inverse,
    left_or_right,
    project_detection,
    wrap_angle,
)


def test_wrap_angle_range_and_endpoint():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert abs(wrap_angle(3.0 * math.pi) - math.pi) < 1e-12
    for k in range(-7, 8):
        a = 0.37 + k * 2.0 * math.pi
        assert abs(wrap_angle(a) - 0.37) < 1e-9
    rng = np.random.default_rng(0)
    for a in rng.uniform(-50.0, 50.0, size=500):
        w = wrap_angle(float(a))
        assert -math.pi < w <= math.pi
        # same direction on the unit circle
        assert abs(math.sin(w) - math.sin(a)) < 1e-9
        assert abs(math.cos(w) - math.cos(a)) < 1e-9


def test_pose_normalizes_theta_on_construction():
    p = Pose2D(1.0, 2.0, 5.0 * math.pi)
    assert abs(p.theta - math.pi) < 1e-12
    assert p.position == GroundPoint(1.0, 2.0)


def test_compose_inverse_identity():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = Pose2D(*rng.uniform(-5, 5, size=2), float(rng.uniform(-9, 9)))
        q = compose(p, inverse(p))
        assert abs(q.x) < 1e-9 and abs(q.y) < 1e-9 and abs(wrap_angle(q.theta)) < 1e-9


def test_compose_is_associative():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b, c = (
            Pose2D(*rng.uniform(-3, 3, size=2), float(rng.uniform(-4, 4)))
            for _ in range(3)
        )
        lhs = compose(compose(a, b), c)
        rhs = compose(a, compose(b, c))
        assert abs(lhs.x - rhs.x) < 1e-9
        assert abs(lhs.y - rhs.y) < 1e-9
        assert abs(wrap_angle(lhs.theta - rhs.theta)) < 1e-9


def test_compose_hand_value():
    # 90 degrees left, then 1 m forward in the child frame -> (0, 1) facing +y
    base = Pose2D(0.0, 0.0, math.pi / 2.0)
    out = compose(base, Pose2D(1.0, 0.0, 0.0))
    assert abs(out.x) < 1e-12 and abs(out.y - 1.0) < 1e-12


def test_bearing_from_pixel_hand_values():
    cam = CameraModel()
    mid = BoundingBox(310.0, 330.0, 100.0, 120.0, 2.0)
    assert abs(bearing_from_pixel(mid, cam)) < 1e-12
    # left image edge: u_c = 0 -> bearing = +hfov/2 by the tangent-plane map
    left = BoundingBox(-10.0, 10.0, 0.0, 10.0, 2.0)
    assert abs(bearing_from_pixel(left, cam) - math.atan(math.tan(0.5 * cam.hfov))) < 1e-12
    # quarter off center: tan(bearing) = 0.5 * tan(hfov/2)
    quarter = BoundingBox(150.0, 170.0, 0.0, 10.0, 2.0)
    want = math.atan(0.5 * math.tan(0.5 * cam.hfov))
    assert abs(bearing_from_pixel(quarter, cam) - want) < 1e-12


def test_projection_round_trip_random_points():
    cam = CameraModel()
    rng = np.random.default_rng(3)
    n = 0
    while n < 1000:
        robot = Pose2D(*rng.uniform(-4, 4, size=2), float(rng.uniform(-4, 4)))
        point = GroundPoint(*rng.uniform(-8, 8, size=2))
        pix = ground_point_to_pixel(robot, point, cam)
        if pix is None:
            continue
        u_c, v_c, depth = pix
        box = BoundingBox(u_c - 5.0, u_c + 5.0, v_c - 5.0, v_c + 5.0, depth)
        back = project_detection(robot, box, cam)
        assert distance(back, point) < 1e-9
        n += 1


def test_project_detection_rejects_short_depth():
    cam = CameraModel()
    box = BoundingBox(0.0, 10.0, 0.0, 10.0, 0.5 * cam.mount_height)
    with pytest.raises(DegenerateDepth):
        project_detection(Pose2D(0, 0, 0), box, cam)


def test_ground_point_to_pixel_frustum_cuts():
    cam = CameraModel()
    robot = Pose2D(0.0, 0.0, 0.0)
    assert ground_point_to_pixel(robot, GroundPoint(-1.0, 0.0), cam) is None  # behind
    assert ground_point_to_pixel(robot, GroundPoint(0.5, 5.0), cam) is None  # far left
    # too close: depression angle exceeds the half vfov
    near = cam.mount_height / math.tan(0.5 * cam.vfov) * 0.9
    assert ground_point_to_pixel(robot, GroundPoint(cam.forward_offset + near, 0.0), cam) is None
    # solid middle distance is visible
    assert ground_point_to_pixel(robot, GroundPoint(2.0, 0.0), cam) is not None


def test_left_or_right_sides():
    robot = Pose2D(0.0, 0.0, 0.0)
    assert left_or_right(robot, GroundPoint(1.0, 1.0)) is Side.LEFT
    assert left_or_right(robot, GroundPoint(1.0, -1.0)) is Side.RIGHT
    assert left_or_right(robot, GroundPoint(3.0, 0.0)) is Side.AHEAD
    # heading rotated: same target flips sides
    turned = Pose2D(0.0, 0.0, math.pi / 2.0)
    assert left_or_right(turned, GroundPoint(1.0, 1.0)) is Side.RIGHT


def test_angle_to_values_and_coincident():
    robot = Pose2D(1.0, 1.0, math.pi / 2.0)
    assert abs(angle_to(robot, GroundPoint(1.0, 3.0))) < 1e-12
    assert abs(angle_to(robot, GroundPoint(0.0, 1.0)) - math.pi / 2.0) < 1e-12
    with pytest.raises(CoincidentPoint):
        angle_to(robot, GroundPoint(1.0, 1.0))


def test_camera_model_validation():
    with pytest.raises(ValueError):
        CameraModel(hfov=0.0)
    with pytest.raises(ValueError):
        CameraModel(vfov=3.5)
    with pytest.raises(ValueError):
        CameraModel(mount_height=-0.1)
    with pytest.raises(ValueError):
        CameraModel(image_width=0)
