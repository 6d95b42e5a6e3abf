"""Independent oracles used by the test suite.

These deliberately avoid the library's solution paths: finite differences for
the warp Jacobian, dense-grid search plus Newton for 3Q3 roots, and direct
two-step projection for reference-frame composition.
"""

from __future__ import annotations

import numpy as np

GRID_BOUND = 10.0
GRID_STEP = 0.05


def finite_difference_jacobian(R, t, x, d, n, step=1e-6):
    """Central differences of u -> project(R unproject(u) + t) at u = x."""
    xt = np.array([x[0], x[1], 1.0])
    c = n @ (d * xt)

    def warp(u):
        ut = np.array([u[0], u[1], 1.0])
        X = (c / (n @ ut)) * ut
        q = R @ X + t
        return q[:2] / q[2]

    J = np.zeros((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        J[:, j] = (warp(x + e) - warp(x - e)) / (2 * step)
    return J


def _mon10(r):
    x, y, z = r
    return np.array([x * x, x * y, x * z, y * y, y * z, z * z, x, y, z, 1.0])


def _newton_batch(C, seeds, iterations=25):
    """Newton iterations on a stack of seed points, vectorized."""
    P = seeds.copy()
    for _ in range(iterations):
        x, y, z = P[:, 0], P[:, 1], P[:, 2]
        mon = np.stack([x * x, x * y, x * z, y * y, y * z, z * z, x, y, z,
                        np.ones_like(x)], axis=1)
        F = mon @ C.T                                   # (k, 3)
        zeros = np.zeros_like(x)
        ones = np.ones_like(x)
        dmon = np.stack([
            np.stack([2 * x, y, z, zeros, zeros, zeros, ones, zeros, zeros, zeros], axis=1),
            np.stack([zeros, x, zeros, 2 * y, z, zeros, zeros, ones, zeros, zeros], axis=1),
            np.stack([zeros, zeros, x, zeros, y, 2 * z, zeros, zeros, ones, zeros], axis=1),
        ], axis=2)                                      # (k, 10, 3)
        J = np.einsum("rm,kmv->krv", C, dmon)           # (k, 3, 3)
        good = np.abs(np.linalg.det(J)) > 1e-14
        if not good.any():
            break
        step = np.zeros_like(P)
        step[good] = np.linalg.solve(J[good], -F[good][..., None])[..., 0]
        P = P + step
        if np.abs(step).max() < 1e-14:
            break
    return P


def brute_force_3q3_roots(C, bound=GRID_BOUND, step=GRID_STEP,
                          residual_tol=1e-9, dedup_tol=1e-6):
    """All real roots found by dense grid search plus Newton polishing.

    Scans [-bound, bound]^3 at the given step, seeds Newton everywhere the
    residual is small relative to the coefficient scale, and deduplicates.
    """
    C = np.asarray(C, dtype=np.float64)
    axis = np.arange(-bound, bound + step / 2, step)
    row_norm = np.linalg.norm(C, axis=1)
    tau = 0.35 * row_norm
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    seeds = []
    # separable pieces: f(x) + cross terms + g(y) + h(z)
    for z in axis:
        Q = []
        for i in range(3):
            c = C[i]
            q = (c[0] * X * X + c[1] * X * Y + c[3] * Y * Y
                 + (c[2] * z + c[6]) * X + (c[4] * z + c[7]) * Y
                 + (c[5] * z * z + c[8] * z + c[9]))
            Q.append(np.abs(q) < tau[i])
        mask = Q[0] & Q[1] & Q[2]
        if mask.any():
            xs, ys = np.nonzero(mask)
            pts = np.stack([axis[xs], axis[ys], np.full(len(xs), z)], axis=1)
            seeds.append(pts)
    if not seeds:
        return np.zeros((0, 3))
    seeds = np.concatenate(seeds)
    polished = _newton_batch(C, seeds)
    scale = np.abs(C).max()
    roots = []
    for p in polished:
        if not np.all(np.isfinite(p)):
            continue
        if np.abs(p).max() > bound:
            continue
        if np.abs(C @ _mon10(p)).max() > residual_tol * scale:
            continue
        if any(np.linalg.norm(p - r) < dedup_tol for r in roots):
            continue
        roots.append(p)
    return np.array(roots) if roots else np.zeros((0, 3))


def planted_quadric_triple(rng, points=5):
    """Random quadric triple passing through `points` planted points (at most
    five keeps the triple generic)."""
    pts = rng.normal(size=(points, 3))
    Mv = np.stack([_mon10(p) for p in pts])
    _, _, Vt = np.linalg.svd(Mv)
    basis = Vt[points:]
    C = rng.normal(size=(3, 10 - points)) @ basis
    return C, pts
