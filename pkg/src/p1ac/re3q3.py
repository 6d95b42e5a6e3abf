"""Solver for three quadratic equations in three unknowns (3Q3).

Monomial order of a quadric row: [x^2, xy, xz, y^2, yz, z^2, x, y, z, 1].
Up to eight real roots.

Method: hide z and treat the system as three conics in (x, y).  The 3x3
block over (x^2, xy, y^2) is constant in z; inverting it rewrites the system
as x^2 = L1, xy = L2, y^2 = L3 with each L linear in (x, y) and polynomial in
z.  The syzygies y*L1 - x*L2 and y*L2 - x*L3, reduced again through the same
substitutions, are linear in (x, y); a third independent linear relation
comes from multiplying the second by x and reducing once more.  The three
relations form a 3x3 matrix T(z) acting on (x, y, 1) whose determinant has
degree 8; its real roots (isolated with Sturm bisection) give the z values,
the 2x2 top of T(z) gives x and y, and a few damped Newton steps polish each
candidate on the original quadrics.

A random orthogonal change of variables keeps the (x^2, xy, y^2) block
invertible for inputs that are axis-aligned or otherwise special; it is
re-drawn when the block or the determinant's leading coefficient degenerates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sturm
from .errors import DegenerateSystemError
from .rng import random_rotation

MONOMIALS_10 = ("x2", "xy", "xz", "y2", "yz", "z2", "x", "y", "z", "1")

_MAX_VARIABLE_REDRAWS = 4
_BLOCK_DET_TOL = 1e-8
_LEADING_COEFF_TOL = 1e-10
_IMAG_TOL = 1e-8


@dataclass(frozen=True)
class QuadricTriple:
    """Coefficients of three quadrics, 3x10 over MONOMIALS_10.

    Rows degenerating to linear equations are permitted as long as the system
    as a whole is quadratic.
    """

    C: np.ndarray

    def __post_init__(self):
        C = np.array(self.C, dtype=np.float64)
        if C.shape != (3, 10):
            raise ValueError(f"expected 3x10 coefficients, got {C.shape}")
        if not np.all(np.isfinite(C)):
            raise ValueError("non-finite coefficients")
        if np.abs(C[:, :6]).max() == 0.0:
            raise ValueError("no quadratic monomial anywhere; not a 3Q3 system")
        if np.any(np.abs(C).max(axis=1) == 0.0):
            raise ValueError("identically zero row")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    def residuals(self, root: np.ndarray) -> np.ndarray:
        return self.C @ _mon10(root)


@dataclass(frozen=True)
class RootSet:
    """Real roots (k x 3, k <= 8) and the max quadric residual of each."""

    roots: np.ndarray
    residuals: np.ndarray

    def __len__(self) -> int:
        return len(self.roots)


def _mon10(r) -> np.ndarray:
    x, y, z = r
    return np.array([x * x, x * y, x * z, y * y, y * z, z * z, x, y, z, 1.0])


def _mon10_jacobian(r) -> np.ndarray:
    x, y, z = r
    return np.array([
        [2 * x, 0, 0],
        [y, x, 0],
        [z, 0, x],
        [0, 2 * y, 0],
        [0, z, y],
        [0, 0, 2 * z],
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [0, 0, 0],
    ])


def _rotate_quadrics(C: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Coefficients after the substitution v = Q v' (v' are the new variables)."""
    out = np.empty_like(C)
    for i in range(3):
        c = C[i]
        S = np.array([
            [c[0], c[1] / 2, c[2] / 2],
            [c[1] / 2, c[3], c[4] / 2],
            [c[2] / 2, c[4] / 2, c[5]],
        ])
        S2 = Q.T @ S @ Q
        l2 = Q.T @ c[6:9]
        out[i] = (S2[0, 0], 2 * S2[0, 1], 2 * S2[0, 2], S2[1, 1], 2 * S2[1, 2],
                  S2[2, 2], l2[0], l2[1], l2[2], c[9])
    return out


def _pad(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[: len(a)] = a
    return out


def _eliminate(Cr: np.ndarray):
    """Build T(z) rows (u_i, v_i, w_i ascending in z) and det T, or None if the
    leading structure degenerates for this variable rotation."""
    G3 = Cr[:, [0, 1, 3]]
    if abs(np.linalg.det(G3)) < _BLOCK_DET_TOL:
        return None
    Gi = np.linalg.inv(G3)
    # x-coefficient d(z) = c3 z + c7, y-coefficient e(z) = c5 z + c8,
    # constant f(z) = c6 z^2 + c9 z + c10 (ascending)
    dmat = np.stack([Cr[:, 6], Cr[:, 2]], axis=1)
    emat = np.stack([Cr[:, 7], Cr[:, 4]], axis=1)
    fmat = np.stack([Cr[:, 9], Cr[:, 8], Cr[:, 5]], axis=1)
    alpha = -(Gi @ dmat)        # 3 x 2
    beta = -(Gi @ emat)         # 3 x 2
    gamma = -(Gi @ fmat)        # 3 x 3
    a1, a2, a3 = alpha
    b1, b2, b3 = beta
    g1, g2, g3 = gamma

    def reduce_quad(A, B, Cq, D, E, F, n_uv, n_w):
        """Reduce A x^2 + B xy + Cq y^2 + D x + E y + F to a linear relation."""
        u = _pad(np.convolve(A, a1), n_uv) + _pad(np.convolve(B, a2), n_uv) + _pad(np.convolve(Cq, a3), n_uv) + _pad(D, n_uv)
        v = _pad(np.convolve(A, b1), n_uv) + _pad(np.convolve(B, b2), n_uv) + _pad(np.convolve(Cq, b3), n_uv) + _pad(E, n_uv)
        w = _pad(np.convolve(A, g1), n_w) + _pad(np.convolve(B, g2), n_w) + _pad(np.convolve(Cq, g3), n_w) + _pad(F, n_w)
        return u, v, w

    zero = np.zeros(1)
    u1, v1, w1 = reduce_quad(-a2, _pad(a1, 2) - _pad(b2, 2), b1, -g2, g1, zero, 3, 4)
    u2, v2, w2 = reduce_quad(-a3, _pad(a2, 2) - _pad(b3, 2), b2, -g3, g2, zero, 3, 4)
    # x * (second relation), reduced again, is independent of the first two;
    # x * (first) and y * (second) collapse identically.
    u3, v3, w3 = reduce_quad(u2, v2, zero, w2, zero, zero, 4, 5)

    t1 = np.convolve(u1, np.convolve(v2, w3) - np.convolve(w2, v3))
    t2 = np.convolve(v1, np.convolve(u2, w3) - np.convolve(w2, u3))
    t3 = np.convolve(w1, np.convolve(u2, v3) - np.convolve(v2, u3))
    det = (t1 - t2 + t3)[:9]
    scale = np.abs(det).max()
    if scale == 0.0:
        raise DegenerateSystemError("determinant polynomial is identically zero")
    if abs(det[8]) < _LEADING_COEFF_TOL * scale:
        return None
    return (u1, v1, w1, u2, v2, w2, u3, v3, w3), det / scale


def polish_root(sys: QuadricTriple, root: np.ndarray, iterations: int = 10) -> np.ndarray:
    """Damped Newton on the three quadric residuals; best effort, returns the
    input unchanged when the Jacobian is singular at the root."""
    C = sys.C if isinstance(sys, QuadricTriple) else np.asarray(sys)
    r = np.array(root, dtype=np.float64)
    res = np.linalg.norm(C @ _mon10(r))
    for _ in range(iterations):
        J = C @ _mon10_jacobian(r)
        F = C @ _mon10(r)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        # damp: halve the step until the residual does not increase
        lam = 1.0
        for _ in range(6):
            cand = r + lam * step
            cand_res = np.linalg.norm(C @ _mon10(cand))
            if cand_res <= res:
                break
            lam *= 0.5
        else:
            break
        if np.linalg.norm(lam * step) < 1e-15 * max(1.0, np.linalg.norm(r)):
            r = cand
            res = cand_res
            break
        r, res = cand, cand_res
    return r


def solve_3q3(sys: QuadricTriple | np.ndarray,
              rng: np.random.Generator | int | None = None,
              method: str = "sturm") -> RootSet:
    """All real roots of the quadric triple, polished and deduplicated.

    rng seeds the random orthogonal change of variables (an integer, a
    Generator, or None for a fixed default), so results are reproducible.
    method selects the univariate back end: "sturm" (default) or "companion"
    (eigenvalues of the companion matrix, which also admits complex pairs
    with tiny imaginary part).  Systems whose leading structure defeats the
    hidden-variable elimination (e.g. rows that are only linear) fall back to
    a dense eigenvalue method on the multiplication operator.
    """
    if not isinstance(sys, QuadricTriple):
        sys = QuadricTriple(np.asarray(sys, dtype=np.float64))
    if method not in ("sturm", "companion"):
        raise ValueError(f"unknown method {method!r}")
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(0 if rng is None else int(rng))
    C0 = sys.C
    scale_inf = np.abs(C0).max()
    Cn = C0 / np.linalg.norm(C0, axis=1, keepdims=True)

    # rows with no quadratic content stay that way under any variable
    # rotation, so go straight to the action-matrix fallback for them
    elim = None
    Q = np.eye(3)
    if np.abs(Cn[:, :6]).max(axis=1).min() > 1e-12:
        for _ in range(_MAX_VARIABLE_REDRAWS):
            Q = random_rotation(rng)
            Cr = _rotate_quadrics(Cn, Q)
            Cr /= np.linalg.norm(Cr, axis=1, keepdims=True)
            elim = _eliminate(Cr)
            if elim is not None:
                break
    if elim is None:
        candidates = _action_matrix_roots(Cn)
    else:
        rows, det = elim
        u1, v1, w1, u2, v2, w2, u3, v3, w3 = rows
        if method == "sturm":
            zs = sturm.real_roots(det)
            if not zs:
                zs = _companion_real_roots(det)
        else:
            zs = _companion_real_roots(det)
        candidates = []
        for z0 in zs:
            xy = _recover_xy(u1, v1, w1, u2, v2, w2, u3, v3, w3, z0)
            if xy is not None:
                candidates.append(Q @ np.array([xy[0], xy[1], z0]))

    roots = []
    residuals = []
    for cand in candidates:
        cand = polish_root(sys, cand)
        res = float(np.abs(sys.residuals(cand)).max())
        if res >= 1e-6 * scale_inf:
            continue
        if any(np.linalg.norm(cand - r) < 1e-6 for r in roots):
            continue
        roots.append(cand)
        residuals.append(res)
        if len(roots) == 8:
            break
    if roots:
        return RootSet(roots=np.array(roots), residuals=np.array(residuals))
    return RootSet(roots=np.zeros((0, 3)), residuals=np.zeros(0))


# Exponent tuples of the ten quadric monomials (matches MONOMIALS_10).
_QUAD_EXPS = ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2),
              (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0))


def _monomials_upto(degree: int) -> list:
    return sorted(((i, j, k) for i in range(degree + 1) for j in range(degree + 1)
                   for k in range(degree + 1) if i + j + k <= degree),
                  key=lambda e: (sum(e), tuple(-v for v in e)))


def _action_matrix_roots(Cn: np.ndarray) -> list:
    """Root candidates via the multiplication-by-x operator on the quotient of
    a Macaulay matrix.  Handles rank-deficient quadratic structure (rows that
    degenerate to linear); escalates the truncation degree when the lower one
    does not close the ideal."""
    row_scale = np.abs(Cn).max(axis=1)
    row_degree = []
    for i in range(3):
        if np.abs(Cn[i, :6]).max() > 1e-12 * row_scale[i]:
            row_degree.append(2)
        elif np.abs(Cn[i, 6:9]).max() > 1e-12 * row_scale[i]:
            row_degree.append(1)
        else:
            return []        # nonzero constant row: inconsistent system
    candidates = []
    for target in (3, 4):
        mons = _monomials_upto(target)
        index = {e: i for i, e in enumerate(mons)}
        rows = []
        for i in range(3):
            for mult in _monomials_upto(target - row_degree[i]):
                row = np.zeros(len(mons))
                for e, coeff in zip(_QUAD_EXPS, Cn[i]):
                    if coeff != 0.0:
                        key = (e[0] + mult[0], e[1] + mult[1], e[2] + mult[2])
                        row[index[key]] += coeff
                rows.append(row)
        M = np.stack(rows)
        _, sv, Vt = np.linalg.svd(M)
        tol = max(sv[0], 1.0) * 1e-10
        rank = int((sv > tol).sum())
        nullity = len(mons) - rank
        if nullity <= 0:
            return candidates
        if nullity > 8:
            if target == 4:
                raise DegenerateSystemError("solution family is not zero-dimensional")
            continue
        N = Vt[rank:].T
        lower = _monomials_upto(target - 1)
        s_rows = np.array([index[e] for e in lower])
        x_rows = np.array([index[(e[0] + 1, e[1], e[2])] for e in lower])
        NS, NX = N[s_rows], N[x_rows]
        action, *_ = np.linalg.lstsq(NS, NX, rcond=None)
        eigvals, eigvecs = np.linalg.eig(action)
        const_row = index[(0, 0, 0)]
        lin_rows = [index[(1, 0, 0)], index[(0, 1, 0)], index[(0, 0, 1)]]
        for i in range(len(eigvals)):
            if abs(eigvals[i].imag) > _IMAG_TOL * max(1.0, abs(eigvals[i])):
                continue
            vec = (N @ eigvecs[:, i]).real
            const = vec[const_row]
            if abs(const) < 1e-12:
                continue
            candidates.append(np.array([vec[r] for r in lin_rows]) / const)
    return candidates


def _companion_real_roots(det: np.ndarray) -> list:
    dd = np.trim_zeros(det, "b")
    if len(dd) <= 1:
        return []
    rts = np.roots(dd[::-1])
    return sorted(r.real for r in rts if abs(r.imag) < _IMAG_TOL)


def _recover_xy(u1, v1, w1, u2, v2, w2, u3, v3, w3, z0: float):
    """Solve T(z0) (x, y, 1) = 0 for (x, y); uses the 2x2 top block and falls
    back to the nullspace of the full 3x3 when the block is ill-conditioned."""
    a11 = np.polyval(u1[::-1], z0)
    a12 = np.polyval(v1[::-1], z0)
    a21 = np.polyval(u2[::-1], z0)
    a22 = np.polyval(v2[::-1], z0)
    b1 = -np.polyval(w1[::-1], z0)
    b2 = -np.polyval(w2[::-1], z0)
    det2 = a11 * a22 - a12 * a21
    scale = max(abs(a11), abs(a12), abs(a21), abs(a22))
    if abs(det2) > 1e-10 * max(1.0, scale * scale):
        return ((a22 * b1 - a12 * b2) / det2, (a11 * b2 - a21 * b1) / det2)
    T = np.array([
        [a11, a12, -b1],
        [a21, a22, -b2],
        [np.polyval(u3[::-1], z0), np.polyval(v3[::-1], z0), np.polyval(w3[::-1], z0)],
    ])
    _, _, Vt = np.linalg.svd(T)
    v = Vt[-1]
    if abs(v[2]) < 1e-12:
        return None
    return (v[0] / v[2], v[1] / v[2])
