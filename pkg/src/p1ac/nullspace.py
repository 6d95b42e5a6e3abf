"""Solver for the ten orthogonality quadrics on nullspace coefficients.

The nullspace route parameterizes vec([R | t]) = B b with B the 12x6
nullspace of the constraint matrix and b six coefficients, the last fixed to
one.  Requiring R to be orthogonal up to scale (equal row norms, equal column
norms, vanishing dot products) yields ten quadratic equations in the five
free coefficients, with eight solutions in general.

These are solved by a generic dense eigenvalue method: the ten quadrics and
their products with each variable form a Macaulay-style matrix over the 56
monomials of degree <= 3; its (generically 8-dimensional) numerical nullspace
is spanned by the monomial vectors of the solutions, and the multiplication
map by b1 restricted to that space is recovered by least squares.  Its
eigenvectors give the solutions directly, which a short Gauss-Newton polish
then sharpens on the original ten equations.

When the fixed coefficient of the true solution happens to be zero every
candidate fails the residual screen; retrying with a different coefficient
fixed to one (a different affine chart) recovers those cases.
"""

from __future__ import annotations

import itertools

import numpy as np

_NVARS = 5

# Monomials of degree <= 3 in five variables (56), ordered by total degree.
_MONS3 = sorted(
    (e for e in itertools.product(range(4), repeat=_NVARS) if sum(e) <= 3),
    key=lambda e: (sum(e), tuple(-x for x in e)),
)
_MON3_INDEX = {e: i for i, e in enumerate(_MONS3)}

# Basis of a single quadric: pair monomials (i <= j), linear terms, constant.
_PAIRS = [(i, j) for i in range(_NVARS) for j in range(i, _NVARS)]
_QMON = (
    [tuple((1 if k == i else 0) + (1 if k == j else 0) for k in range(_NVARS)) for i, j in _PAIRS]
    + [tuple(1 if k == i else 0 for k in range(_NVARS)) for i in range(_NVARS)]
    + [tuple([0] * _NVARS)]
)
_QMON_COLS = np.array([_MON3_INDEX[e] for e in _QMON])


def _shifted_cols(var: int) -> np.ndarray:
    cols = []
    for e in _QMON:
        e2 = list(e)
        e2[var] += 1
        cols.append(_MON3_INDEX[tuple(e2)])
    return np.array(cols)


_SHIFT_COLS = [_shifted_cols(v) for v in range(_NVARS)]
_DEG2_ROWS = np.array([_MON3_INDEX[e] for e in _QMON])
_B1_ROWS = np.array([_MON3_INDEX[tuple((e[0] + 1,) + e[1:])] for e in _QMON])
_CONST_ROW = _MON3_INDEX[tuple([0] * _NVARS)]
_LIN_ROWS = np.array([_MON3_INDEX[tuple(1 if k == i else 0 for k in range(_NVARS))]
                      for i in range(_NVARS)])

_NULLITY = 8
_EIG_IMAG_TOL = 1e-6


def orthogonality_quadrics(B: np.ndarray) -> np.ndarray:
    """10x21 coefficient matrix of the row/column norm and dot-product
    constraints, as quadrics in the first five coefficients (the sixth is 1).

    B is the 12x6 basis; its first nine rows hold vec(R) row-major.
    """
    rows = [B[0:3], B[3:6], B[6:9]]
    cols = [B[[0, 3, 6]], B[[1, 4, 7]], B[[2, 5, 8]]]

    def gram(X, Y):
        G = X.T @ Y
        return 0.5 * (G + G.T)

    r = {(i, j): gram(rows[i], rows[j]) for i in range(3) for j in range(i, 3)}
    c = {(i, j): gram(cols[i], cols[j]) for i in range(3) for j in range(i, 3)}
    forms = [
        r[(0, 0)] - r[(1, 1)],
        r[(0, 0)] - r[(2, 2)],
        c[(0, 0)] - c[(1, 1)],
        c[(0, 0)] - c[(2, 2)],
        r[(0, 1)], r[(0, 2)], r[(1, 2)],
        c[(0, 1)], c[(0, 2)], c[(1, 2)],
    ]
    E = np.empty((10, 21))
    for k, G in enumerate(forms):
        idx = 0
        for i, j in _PAIRS:
            E[k, idx] = G[i, j] * (2.0 if i != j else 1.0)
            idx += 1
        for i in range(_NVARS):
            E[k, idx] = 2.0 * G[i, 5]
            idx += 1
        E[k, 20] = G[5, 5]
    return E


def _quadric_values(E: np.ndarray, b: np.ndarray) -> np.ndarray:
    mon = np.concatenate([[b[i] * b[j] for i, j in _PAIRS], b, [1.0]])
    return E @ mon


def _quadric_jacobian(E: np.ndarray, b: np.ndarray) -> np.ndarray:
    J = np.zeros((21, _NVARS))
    for k, (i, j) in enumerate(_PAIRS):
        J[k, i] += b[j]
        J[k, j] += b[i]
    J[15:20] = np.eye(_NVARS)
    return E @ J


def gauss_newton_polish(E: np.ndarray, b: np.ndarray, iterations: int = 6) -> np.ndarray:
    """Polish a coefficient candidate on the overdetermined 10x5 system."""
    b = np.array(b, dtype=np.float64)
    res = np.linalg.norm(_quadric_values(E, b))
    for _ in range(iterations):
        J = _quadric_jacobian(E, b)
        g = J.T @ (-_quadric_values(E, b))
        H = J.T @ J
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        cand = b + step
        cand_res = np.linalg.norm(_quadric_values(E, cand))
        if not np.isfinite(cand_res) or cand_res > res:
            break
        b, res = cand, cand_res
        if np.linalg.norm(step) < 1e-14:
            break
    return b


def solve_quadric_coefficients(E: np.ndarray, residual_tol: float = 1e-6) -> list:
    """All real coefficient vectors b (length 5) solving the ten quadrics."""
    scale = max(1.0, float(np.abs(E).max()))
    C = np.zeros((60, 56))
    C[np.arange(10)[:, None], _QMON_COLS] = E
    for v in range(_NVARS):
        r0 = 10 * (v + 1)
        C[np.arange(r0, r0 + 10)[:, None], _SHIFT_COLS[v]] = E
    _, _, Vt = np.linalg.svd(C)
    N = Vt[56 - _NULLITY:].T                     # 56 x 8
    NS = N[_DEG2_ROWS]
    NB = N[_B1_ROWS]
    action, *_ = np.linalg.lstsq(NS, NB, rcond=None)
    eigvals, eigvecs = np.linalg.eig(action)
    out = []
    for i in range(len(eigvals)):
        if abs(eigvals[i].imag) > _EIG_IMAG_TOL:
            continue
        vec = (N @ eigvecs[:, i]).real
        const = vec[_CONST_ROW]
        if abs(const) < 1e-12:
            continue
        b = vec[_LIN_ROWS] / const
        b = gauss_newton_polish(E, b)
        if np.abs(_quadric_values(E, b)).max() < residual_tol * scale:
            out.append(b)
    return out


def solve_orthogonality_system(B: np.ndarray, residual_tol: float = 1e-6) -> list:
    """Candidate vec([R | t]) directions from the nullspace basis B (12x6).

    Fixes the last coefficient to one; if no candidate survives (the measure
    zero case where the true solution has that coefficient equal to zero),
    retries with other coefficients fixed.
    """
    for chart in (5, 0, 1):
        order = [k for k in range(6) if k != chart] + [chart]
        Bp = B[:, order]
        E = orthogonality_quadrics(Bp)
        coeffs = solve_quadric_coefficients(E, residual_tol=residual_tol)
        if coeffs:
            return [Bp @ np.concatenate([b, [1.0]]) for b in coeffs]
    return []
