"""3Q3 kernel: three quadrics in three unknowns, up to eight real roots."""

import numpy as np
import pytest

from p1ac.errors import DegenerateSystemError
from p1ac.re3q3 import MONOMIALS_10, QuadricTriple, RootSet, polish_root, solve_3q3

from oracles import brute_force_3q3_roots, planted_quadric_triple


def separable_system():
    """x^2 = 1, y^2 = 1, z^2 = 1."""
    C = np.zeros((3, 10))
    C[0, 0] = 1.0
    C[1, 3] = 1.0
    C[2, 5] = 1.0
    C[:, 9] = -1.0
    return C


def linear_rows_system():
    """x^2 + x - 2 = 0, y - x = 0, z - 1 = 0."""
    C = np.zeros((3, 10))
    C[0, 0] = 1.0
    C[0, 6] = 1.0
    C[0, 9] = -2.0
    C[1, 7] = 1.0
    C[1, 6] = -1.0
    C[2, 8] = 1.0
    C[2, 9] = -1.0
    return C


def _match(roots: np.ndarray, expected, tol=1e-6):
    for e in expected:
        assert len(roots) > 0
        assert np.min(np.linalg.norm(roots - np.asarray(e), axis=1)) < tol, \
            f"missing root {e}"


class TestSolve3q3:
    def test_separable_eight_roots(self):
        rs = solve_3q3(separable_system(), rng=0)
        assert len(rs) == 8
        expected = [(sx, sy, sz) for sx in (-1, 1) for sy in (-1, 1)
                    for sz in (-1, 1)]
        _match(rs.roots, expected, tol=1e-9)

    def test_linear_rows_permitted(self):
        rs = solve_3q3(linear_rows_system(), rng=0)
        assert len(rs) == 2
        _match(rs.roots, [(1.0, 1.0, 1.0), (-2.0, -2.0, 1.0)], tol=1e-9)

    def test_brute_force_oracle_agreement(self, rng):
        checked_roots = 0
        for trial in range(6):
            C = rng.normal(size=(3, 10))
            oracle = brute_force_3q3_roots(C)
            mine = solve_3q3(C, rng=trial)
            scale = np.abs(C).max()
            for r in oracle:
                assert len(mine) > 0
                d = np.min(np.linalg.norm(mine.roots - r, axis=1))
                assert d < 1e-6, f"trial {trial}: missed oracle root {r}"
                checked_roots += 1
            for r in mine.roots:
                assert np.abs(C @ _mon10(r)).max() < 1e-6 * scale
        assert checked_roots >= 6

    def test_planted_roots_recovered(self):
        for trial in range(60):
            C, pts = planted_quadric_triple(np.random.default_rng(500 + trial))
            rs = solve_3q3(C, rng=trial)
            _match(rs.roots, pts, tol=1e-6)

    def test_row_scaling_invariance(self, rng):
        C, _ = planted_quadric_triple(rng)
        base = solve_3q3(C, rng=7)
        C2 = C.copy()
        C2[1] *= -137.5
        scaled = solve_3q3(C2, rng=7)
        assert len(base) == len(scaled)
        for r in base.roots:
            assert np.min(np.linalg.norm(scaled.roots - r, axis=1)) < 1e-9

    def test_variable_relabeling_equivariance(self, rng):
        # swap x and z roles: permute monomial columns accordingly
        C, _ = planted_quadric_triple(rng)
        # order [x2,xy,xz,y2,yz,z2,x,y,z,1] -> swap x<->z:
        perm = [5, 4, 2, 3, 1, 0, 8, 7, 6, 9]
        C2 = C[:, perm]
        base = solve_3q3(C, rng=3)
        swapped = solve_3q3(C2, rng=3)
        assert len(base) == len(swapped)
        for r in base.roots:
            r_sw = np.array([r[2], r[1], r[0]])
            assert np.min(np.linalg.norm(swapped.roots - r_sw, axis=1)) < 1e-9

    def test_no_duplicate_roots(self, rng):
        # the full 10k-system sweep runs as part of the acceptance suite
        for trial in range(150):
            C = rng.normal(size=(3, 10))
            rs = solve_3q3(C, rng=trial)
            assert len(rs) <= 8
            for i in range(len(rs)):
                for j in range(i + 1, len(rs)):
                    assert np.linalg.norm(rs.roots[i] - rs.roots[j]) >= 1e-6

    def test_residual_bound_honored(self, rng):
        for trial in range(100):
            C = rng.normal(size=(3, 10))
            rs = solve_3q3(C, rng=trial)
            assert np.all(rs.residuals < 1e-6 * np.abs(C).max())

    def test_companion_method_agrees(self, rng):
        for trial in range(50):
            C = rng.normal(size=(3, 10))
            a = solve_3q3(C, rng=trial, method="sturm")
            b = solve_3q3(C, rng=trial, method="companion")
            assert len(a) == len(b)
            for r in a.roots:
                assert np.min(np.linalg.norm(b.roots - r, axis=1)) < 1e-9

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            QuadricTriple(np.zeros((3, 10)))
        C = np.zeros((3, 10))
        C[:, 6:9] = np.eye(3)        # all rows linear
        with pytest.raises(ValueError):
            solve_3q3(C)
        C = separable_system()
        C[0, 0] = np.nan
        with pytest.raises(ValueError):
            solve_3q3(C)


class TestPolishRoot:
    def test_exact_root_unchanged(self):
        C = separable_system()
        root = np.array([1.0, -1.0, 1.0])
        out = polish_root(QuadricTriple(C), root)
        assert np.allclose(out, root, atol=1e-15)

    def test_perturbed_separable_recovers(self):
        C = separable_system()
        root = np.array([1.0, 1.0, -1.0]) + 1e-4
        out = polish_root(QuadricTriple(C), root)
        assert np.linalg.norm(out - [1.0, 1.0, -1.0]) < 1e-12

    def test_reduces_residual_by_four_orders(self, rng):
        improvements = []
        for trial in range(30):
            C, pts = planted_quadric_triple(np.random.default_rng(trial))
            tri = QuadricTriple(C)
            for p in pts[:2]:
                noisy = p + rng.normal(scale=1e-5, size=3)
                before = np.abs(tri.residuals(noisy)).max()
                after = np.abs(tri.residuals(polish_root(tri, noisy))).max()
                if before > 1e-12:
                    improvements.append(before / max(after, 1e-300))
        assert np.median(improvements) > 1e4

    def test_singular_jacobian_returns_input(self):
        # x^2 = 0 (triple), y^2 = 0, z^2 = 0: Jacobian singular at the origin
        C = np.zeros((3, 10))
        C[0, 0] = C[1, 3] = C[2, 5] = 1.0
        tri = QuadricTriple(C)
        root = np.zeros(3)
        assert np.allclose(polish_root(tri, root), root)


def _mon10(r):
    x, y, z = r
    return np.array([x * x, x * y, x * z, y * y, y * z, z * z, x, y, z, 1.0])
