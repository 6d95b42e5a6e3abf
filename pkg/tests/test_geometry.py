"""Core geometry: projections, plane unprojection, the analytic warp
differential, Cayley parameterization, and error metrics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p1ac.errors import DegenerateInputError, UnrepresentableRotationError
from p1ac.geometry import (AffineCorrespondence, CayleyRotation, OrientedPoint,
                           Pose, cayley_to_matrix, change_reference_frame,
                           homogeneous, matrix_to_cayley, nearest_rotation,
                           pose_error, project, projection_differential,
                           relative_pose, unproject)
from p1ac.rng import random_rotation, random_unit_vector

from oracles import finite_difference_jacobian


def random_pose(rng) -> Pose:
    return Pose(random_rotation(rng), rng.normal(size=3))


def random_oriented_point(rng) -> OrientedPoint:
    while True:
        x = rng.uniform(-1, 1, size=2)
        d = rng.uniform(4, 8)
        n = random_unit_vector(rng)
        p = d * homogeneous(x)
        if n @ p > 0:
            n = -n
        if abs(n @ homogeneous(x)) > 0.05:
            return OrientedPoint(x=x, d=d, n=n)


class TestProject:
    def test_simple_division(self):
        assert np.allclose(project(np.array([2.0, 4.0, 2.0])), [1.0, 2.0])

    def test_optical_axis(self):
        assert np.allclose(project(np.array([0.0, 0.0, 5.0])), [0.0, 0.0])

    def test_zero_depth_raises(self):
        with pytest.raises(DegenerateInputError):
            project(np.array([0.3, -0.7, 0.0]))


class TestUnproject:
    def test_center_returns_stored_point(self):
        op = OrientedPoint(x=np.zeros(2), d=5.0, n=np.array([0.0, 0.0, -1.0]))
        assert np.allclose(unproject(np.zeros(2), op), [0.0, 0.0, 5.0])

    def test_fronto_parallel_plane(self):
        op = OrientedPoint(x=np.zeros(2), d=5.0, n=np.array([0.0, 0.0, -1.0]))
        assert np.allclose(unproject(np.array([0.1, 0.0]), op), [0.5, 0.0, 5.0])

    def test_plane_membership(self, rng):
        # n . (result - p) = 0 within 1e-12 * |p|
        for _ in range(300):
            op = random_oriented_point(rng)
            u = op.x + rng.normal(scale=0.2, size=2)
            if abs(op.n @ homogeneous(u)) < 1e-3:
                continue
            X = unproject(u, op)
            p = op.point
            assert abs(op.n @ (X - p)) < 1e-12 * np.linalg.norm(p)

    def test_grazing_ray_raises(self):
        # plane normal orthogonal to the ray through u = (1, 0)
        n = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
        op = OrientedPoint(x=np.zeros(2), d=5.0, n=n)
        with pytest.raises(DegenerateInputError):
            unproject(np.array([1.0, 0.0]), op)


class TestProjectionDifferential:
    def test_identity_pose_gives_identity_map(self, rng):
        for _ in range(20):
            op = random_oriented_point(rng)
            diff = projection_differential(Pose.identity(), op)
            assert np.allclose(diff.J, np.eye(2), atol=1e-12)
            assert np.allclose(diff.v, op.x, atol=1e-12)

    def test_matches_finite_differences(self, rng):
        for _ in range(1000):
            pose = Pose(random_rotation(rng), random_unit_vector(rng))
            op = random_oriented_point(rng)
            q = pose.apply(op.point)
            nx = op.n @ homogeneous(op.x)
            m = nx * q[2]
            if q[2] < 0.1 or abs(m) < 1e-6:
                continue
            diff = projection_differential(pose, op)
            assert np.allclose(diff.v, project(q))
            J_fd = finite_difference_jacobian(pose.R, pose.t, op.x, op.d, op.n)
            rel = np.linalg.norm(diff.J - J_fd) / np.linalg.norm(J_fd)
            assert rel < 1e-6

    def test_point_on_query_principal_plane_raises(self):
        op = OrientedPoint(x=np.zeros(2), d=5.0, n=np.array([0.0, 0.0, -1.0]))
        # rotate the point onto the principal plane of the query camera
        R = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
        pose = Pose(R, np.zeros(3))
        with pytest.raises(DegenerateInputError):
            projection_differential(pose, op)


class TestCayley:
    def test_zero_is_identity(self):
        assert np.allclose(cayley_to_matrix(CayleyRotation(0, 0, 0)), np.eye(3))

    def test_unit_x_is_quarter_turn(self):
        R = cayley_to_matrix(CayleyRotation(1, 0, 0))
        assert np.allclose(R, [[1, 0, 0], [0, 0, -1], [0, 1, 0]])

    def test_always_a_rotation(self, rng):
        for _ in range(100):
            c = CayleyRotation(*rng.normal(scale=3, size=3))
            R = cayley_to_matrix(c)
            assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12
            assert abs(np.linalg.det(R) - 1) < 1e-12

    def test_identity_maps_to_zero(self):
        c = matrix_to_cayley(np.eye(3))
        assert c.x == c.y == c.z == 0.0

    def test_quarter_turn_inverse(self):
        c = matrix_to_cayley(np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float))
        assert np.allclose(c.as_array(), [1.0, 0.0, 0.0])

    def test_half_turn_rejected(self):
        Rz = np.diag([-1.0, -1.0, 1.0])    # 180 degrees about z
        with pytest.raises(UnrepresentableRotationError):
            matrix_to_cayley(Rz)

    @settings(max_examples=200, deadline=None)
    @given(st.tuples(*[st.floats(-5.55, 5.55) for _ in range(3)]))
    def test_round_trip(self, params):
        c = CayleyRotation(*params)
        back = matrix_to_cayley(cayley_to_matrix(c))
        assert np.allclose(back.as_array(), c.as_array(), atol=1e-12, rtol=1e-12)

    def test_round_trip_large_parameters(self, rng):
        # |c| up to 10 stays within the spec'd round-trip tolerance
        for _ in range(200):
            v = rng.normal(size=3)
            v = v / np.linalg.norm(v) * rng.uniform(0, 10)
            c = CayleyRotation(*v)
            back = matrix_to_cayley(cayley_to_matrix(c))
            assert np.allclose(back.as_array(), c.as_array(), atol=1e-11)


class TestPoseError:
    def test_exact_match(self, rng):
        pose = random_pose(rng)
        e = pose_error(pose, pose)
        assert e.angular == 0.0 and e.position == 0.0

    def test_constructed_ten_degree_rotation(self):
        angle = math.radians(10.0)
        R = np.array([[math.cos(angle), -math.sin(angle), 0],
                      [math.sin(angle), math.cos(angle), 0],
                      [0, 0, 1.0]])
        e = pose_error(Pose(R, np.zeros(3)), Pose.identity())
        assert abs(e.angular - 10.0) < 1e-12
        assert e.position < 1e-12

    def test_unit_center_offset(self, rng):
        R = random_rotation(rng)
        c1 = np.array([1.0, 2.0, 3.0])
        c2 = np.array([1.0, 2.0, 4.0])
        e = pose_error(Pose(R, -R @ c2), Pose(R, -R @ c1))
        assert e.angular < 1e-12
        assert abs(e.position - 1.0) < 1e-12

    def test_range_and_symmetry(self, rng):
        for _ in range(200):
            a, b = random_pose(rng), random_pose(rng)
            ea, eb = pose_error(a, b), pose_error(b, a)
            assert 0.0 <= ea.angular <= 180.0
            assert ea.position >= 0.0
            assert ea.angular == eb.angular

    def test_resolution_below_arccos_floor(self, rng):
        # tiny rotations must be measurable well below 1e-6 degrees
        axis = random_unit_vector(rng)
        angle = 1e-10
        K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]],
                      [-axis[1], axis[0], 0]])
        R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
        e = pose_error(Pose(R, np.zeros(3)), Pose.identity())
        assert abs(e.angular - math.degrees(angle)) < 1e-12


class TestChangeReferenceFrame:
    def test_identity_reference(self, rng):
        pose = random_pose(rng)
        composed = change_reference_frame(Pose.identity(), pose)
        assert np.allclose(composed.R, pose.R)
        assert np.allclose(composed.t, pose.t)

    def test_pure_translation_reference(self):
        ref = Pose(np.eye(3), np.array([1.0, -2.0, 0.5]))
        composed = change_reference_frame(ref, Pose.identity())
        assert np.allclose(composed.center, ref.center)

    def test_composition_oracle(self, rng):
        # projecting world points through the composed pose equals the
        # two-step transform
        for _ in range(100):
            ref, solved = random_pose(rng), random_pose(rng)
            composed = change_reference_frame(ref, solved)
            X = rng.normal(size=(5, 3))
            direct = composed.apply(X)
            two_step = solved.apply(ref.apply(X))
            assert np.allclose(direct, two_step, atol=1e-12)

    def test_relative_pose_inverts(self, rng):
        ref, world = random_pose(rng), random_pose(rng)
        rel = relative_pose(ref, world)
        back = change_reference_frame(ref, rel)
        assert np.allclose(back.R, world.R, atol=1e-12)
        assert np.allclose(back.t, world.t, atol=1e-12)


class TestTypes:
    def test_pose_rejects_non_rotation(self):
        with pytest.raises(ValueError):
            Pose(np.eye(3) * 1.001, np.zeros(3))
        with pytest.raises(ValueError):
            Pose(-np.eye(3), np.zeros(3))

    def test_pose_immutable(self, rng):
        pose = random_pose(rng)
        with pytest.raises(ValueError):
            pose.R[0, 0] = 2.0

    def test_oriented_point_validation(self):
        with pytest.raises(ValueError):
            OrientedPoint(x=np.zeros(2), d=-1.0, n=np.array([0, 0, -1.0]))
        with pytest.raises(ValueError):
            OrientedPoint(x=np.zeros(2), d=1.0, n=np.array([0, 0, -2.0]))
        with pytest.raises(DegenerateInputError):
            # plane parallel to the ray through x
            OrientedPoint(x=np.zeros(2), d=1.0, n=np.array([1.0, 0.0, 0.0]))

    def test_affine_correspondence_flags_singular(self):
        ac = AffineCorrespondence(x=np.zeros(2), y=np.zeros(2),
                                  A=np.zeros((2, 2)))
        assert not ac.well_posed
        ac2 = AffineCorrespondence(x=np.zeros(2), y=np.zeros(2), A=np.eye(2))
        assert ac2.well_posed

    def test_nearest_rotation(self, rng):
        R = random_rotation(rng)
        M = R + rng.normal(scale=1e-6, size=(3, 3))
        Rn = nearest_rotation(M)
        assert np.linalg.norm(Rn.T @ Rn - np.eye(3)) < 1e-14
        assert np.linalg.norm(Rn - R) < 1e-5
