"""Constraint assembly: the 6x12 linear system, the 13-monomial Cayley form,
and Gauss-Jordan elimination of the scaled translation."""

import numpy as np
import pytest

from p1ac.constraints import (LinearConstraintSystem, build_linear_system,
                              build_monomial_system, eliminate_translation,
                              monomial_vector_10, monomial_vector_13)
from p1ac.errors import DegenerateConstraintError, EliminationSingularError
from p1ac.geometry import (AffineCorrespondence, OrientedPoint, Pose,
                           matrix_to_cayley)
from p1ac.synthetic import generate_problem


def identity_problem():
    """A = I, y = x: the identity pose satisfies the constraints."""
    op = OrientedPoint(x=np.array([0.1, -0.2]), d=5.0,
                       n=np.array([0.1, 0.2, -1.0]) / np.linalg.norm([0.1, 0.2, -1.0]))
    ac = AffineCorrespondence(x=op.x, y=op.x, A=np.eye(2))
    return ac, op


def truth_vec(pose: Pose) -> np.ndarray:
    return np.concatenate([pose.R.reshape(-1), pose.t])


class TestLinearSystem:
    def test_identity_problem_in_nullspace(self):
        ac, op = identity_problem()
        sys = build_linear_system(ac, op)
        vec = truth_vec(Pose.identity())
        assert np.abs(sys.M @ vec).max() < 1e-12

    def test_noise_free_truth_in_nullspace(self):
        worst = 0.0
        for seed in range(1000):
            sp = generate_problem(seed)
            pr = sp.problems[0]
            sys = build_linear_system(pr.ac, pr.op)
            res = np.abs(sys.M @ truth_vec(sp.truth)).max()
            worst = max(worst, res)
        assert worst < 1e-10

    def test_generic_rank_is_six(self):
        for seed in range(200):
            sp = generate_problem(seed)
            pr = sp.problems[0]
            sv = np.linalg.svd(build_linear_system(pr.ac, pr.op).M,
                               compute_uv=False)
            assert sv[5] > 1e-8 * sv[0]

    def test_rows_unit_norm(self):
        ac, op = identity_problem()
        M = build_linear_system(ac, op).M
        assert np.allclose(np.linalg.norm(M, axis=1), 1.0)

    def test_homogeneity_in_unknowns(self):
        sp = generate_problem(7)
        pr = sp.problems[0]
        M = build_linear_system(pr.ac, pr.op).M
        vec = truth_vec(sp.truth)
        lam = 3.7
        assert np.allclose(M @ (lam * vec), lam * (M @ vec))

    def test_scene_scale_equivariance(self):
        # image points enter the builder inhomogeneously, so a global scale
        # acts on the scene: d -> s d moves the truth to (R, s t) while the
        # row space of M keeps the same geometry.  The normalized nullspace
        # projector restricted to the rotation columns must be unchanged.
        for seed in (3, 11, 19):
            sp = generate_problem(seed)
            pr = sp.problems[0]
            s = 2.5
            op2 = OrientedPoint(x=pr.op.x, d=s * pr.op.d, n=pr.op.n)
            M1 = build_linear_system(pr.ac, pr.op).M
            M2 = build_linear_system(pr.ac, op2).M
            vec1 = truth_vec(sp.truth)
            vec2 = np.concatenate([sp.truth.R.reshape(-1), s * sp.truth.t])
            assert np.abs(M1 @ vec1).max() < 1e-10
            assert np.abs(M2 @ vec2).max() < 1e-10
            # same nullspace after undoing the translation-column scale:
            # null(M2) = {vec(R_i, s t_i)}, so null(M2 diag(1, .., s, s, s))
            # equals null(M1)
            D = np.diag([1.0] * 9 + [s] * 3)
            _, _, Vt1 = np.linalg.svd(M1)
            _, _, Vt2 = np.linalg.svd(M2 @ D)
            P1 = Vt1[6:].T @ Vt1[6:]
            P2 = Vt2[6:].T @ Vt2[6:]
            assert np.linalg.norm(P1 - P2) < 1e-9

    def test_grazing_plane_raises(self):
        n = np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0)
        op = OrientedPoint(x=np.array([0.5, 0.0]), d=5.0, n=n)
        ac = AffineCorrespondence(x=np.array([1.0, 0.0]), y=np.zeros(2), A=np.eye(2))
        with pytest.raises(DegenerateConstraintError):
            build_linear_system(ac, op)


class TestMonomialSystem:
    def test_identity_problem(self):
        ac, op = identity_problem()
        sys = build_monomial_system(ac, op)
        mon = monomial_vector_13(np.zeros(3), np.zeros(3))
        assert np.abs(sys.M13 @ mon).max() < 1e-12

    def test_noise_free_truth(self):
        count = 0
        for seed in range(1000):
            sp = generate_problem(seed)
            # stay away from the Cayley singularity at 180 degrees
            if 1.0 + np.trace(sp.truth.R) < 1e-2:
                continue
            pr = sp.problems[0]
            sys = build_monomial_system(pr.ac, pr.op)
            c = matrix_to_cayley(sp.truth.R).as_array()
            s = 1.0 + c @ c
            mon = monomial_vector_13(c, s * sp.truth.t)
            row_norms = np.linalg.norm(sys.M13, axis=1)
            res = np.abs(sys.M13 @ mon) / (row_norms * max(1.0, np.linalg.norm(mon)))
            assert res.max() < 1e-10
            count += 1
        assert count > 900

    def test_consistency_with_linear_system(self, rng):
        # row values of M13 at the monomial vector equal s times the row
        # values of M at vec([R | t]) even for poses off the constraint set
        from p1ac.rng import random_rotation
        sp = generate_problem(3)
        pr = sp.problems[0]
        lin = build_linear_system(pr.ac, pr.op)
        mono = build_monomial_system(pr.ac, pr.op)
        for _ in range(100):
            R = random_rotation(rng)
            t = rng.normal(size=3)
            if 1.0 + np.trace(R) < 1e-2:
                continue
            c = matrix_to_cayley(R).as_array()
            s = 1.0 + c @ c
            lhs = mono.M13 @ monomial_vector_13(c, s * t)
            rhs = s * (lin.M @ np.concatenate([R.reshape(-1), t]))
            assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * max(1.0, s))


class TestEliminateTranslation:
    def test_identity_problem_root(self):
        ac, op = identity_problem()
        red = eliminate_translation(build_monomial_system(ac, op))
        assert np.abs(red.C @ monomial_vector_10(np.zeros(3))).max() < 1e-12
        st = red.recover_scaled_translation(np.zeros(3))
        assert np.abs(st).max() < 1e-12

    def test_noise_free_roots_and_backsubstitution(self):
        checked = 0
        for seed in range(300):
            sp = generate_problem(seed)
            if 1.0 + np.trace(sp.truth.R) < 1e-2:
                continue
            pr = sp.problems[0]
            red = eliminate_translation(build_monomial_system(pr.ac, pr.op))
            c = matrix_to_cayley(sp.truth.R).as_array()
            s = 1.0 + c @ c
            assert np.abs(red.C @ monomial_vector_10(c)).max() < 1e-9 * s
            t = red.recover_scaled_translation(c) / s
            assert np.abs(t - sp.truth.t).max() < 1e-8
            checked += 1
        assert checked > 270

    def test_quadric_roots_satisfy_full_system(self):
        # every root of the reduced system, after back-substitution,
        # satisfies the original six constraints
        from p1ac.re3q3 import solve_3q3
        for seed in range(30):
            sp = generate_problem(seed)
            pr = sp.problems[0]
            mono = build_monomial_system(pr.ac, pr.op)
            red = eliminate_translation(mono)
            roots = solve_3q3(red.C, rng=seed)
            coeff_norm = np.abs(mono.M13).max()
            for c in roots.roots:
                st = red.recover_scaled_translation(c)
                mon = monomial_vector_13(c, st)
                assert np.abs(mono.M13 @ mon).max() < 1e-8 * coeff_norm * max(1.0, np.linalg.norm(mon))

    def test_rank_deficient_st_block_raises(self):
        ac, op = identity_problem()
        sys = build_monomial_system(ac, op)
        M13 = sys.M13.copy()
        M13[:, 2] = M13[:, 0] + M13[:, 1]    # st block rank 2
        sys_bad = type(sys)(M13=M13)
        with pytest.raises(EliminationSingularError):
            eliminate_translation(sys_bad)
