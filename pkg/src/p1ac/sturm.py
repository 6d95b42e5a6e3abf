"""Real-root isolation for univariate polynomials via Sturm sequences.

Coefficients are ascending (c[0] + c[1] x + ...), plain Python floats for
speed: these polynomials are degree <= 8 and the solver calls this in a hot
loop, so numpy overhead would dominate.  Roots are isolated by counting sign
changes of the Sturm chain over a shrinking bisection tree, then refined with
bracketed Newton.
"""

from __future__ import annotations


def _trim(p: list, tol: float) -> list:
    k = len(p)
    while k > 1 and abs(p[k - 1]) <= tol:
        k -= 1
    return p[:k]


def polyval(p: list, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _neg_rem(num: list, den: list) -> list:
    """-(num mod den) for ascending coefficient lists."""
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    for k in range(len(num) - 1, dn - 1, -1):
        f = num[k] / lead
        if f != 0.0:
            base = k - dn
            for j in range(dn):
                num[base + j] -= f * den[j]
        num[k] = 0.0
    rem = num[:dn] if dn > 0 else [0.0]
    return [-c for c in rem]


def sturm_chain(p: list) -> list:
    """Sturm sequence of p (coefficients normalized to unit max)."""
    scale = max(abs(c) for c in p)
    p = [c / scale for c in p]
    p = _trim(p, 1e-14)
    chain = [p]
    if len(p) > 1:
        chain.append([i * p[i] for i in range(1, len(p))])
        while len(chain[-1]) > 1:
            rem = _neg_rem(chain[-2], chain[-1])
            m = max(abs(c) for c in rem)
            rem = _trim(rem, 1e-13 * max(1.0, m))
            if m == 0.0:
                break
            chain.append(rem)
    return chain


def sign_changes(chain: list, x: float) -> int:
    prev = 0
    count = 0
    for p in chain:
        v = polyval(p, x)
        s = (v > 0.0) - (v < 0.0)
        if s == 0:
            continue
        if prev != 0 and s != prev:
            count += 1
        prev = s
    return count


def count_roots(chain: list, lo: float, hi: float) -> int:
    """Number of distinct real roots in (lo, hi]."""
    return sign_changes(chain, lo) - sign_changes(chain, hi)


def _refine(p: list, dp: list, lo: float, hi: float, tol: float) -> float:
    """Bracketed Newton; the bracket is tightened on every iteration so the
    worst case degrades to bisection rather than cycling."""
    x = 0.5 * (lo + hi)
    flo = polyval(p, lo)
    for _ in range(200):
        f = polyval(p, x)
        if f == 0.0:
            return x
        if (f > 0.0) == (flo > 0.0):
            lo, flo = x, f
        else:
            hi = x
        d = polyval(dp, x)
        xn = x - f / d if d != 0.0 else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) < tol * max(1.0, abs(xn)) and (hi - lo) < 1e-6 * max(1.0, abs(xn)):
            return xn
        x = xn
    return x


def real_roots(p, tol: float = 1e-12) -> list:
    """All distinct real roots of p; multiple roots are reported once."""
    p = [float(c) for c in p]
    scale = max(abs(c) for c in p)
    if scale == 0.0:
        return []
    p = _trim(p, 1e-14 * scale)
    if len(p) <= 1:
        return []
    chain = sturm_chain(p)
    pn = chain[0]
    bound = 1.0 + max(abs(c) for c in pn[:-1]) / abs(pn[-1])
    total = count_roots(chain, -bound, bound)
    if total <= 0:
        return []
    stack = [(-bound, bound, total)]
    isolated = []
    while stack:
        lo, hi, cnt = stack.pop()
        if cnt <= 0:
            continue
        if cnt == 1 or (hi - lo) < 1e-10 * max(1.0, abs(lo), abs(hi)):
            isolated.append((lo, hi))
            continue
        mid = 0.5 * (lo + hi)
        left = count_roots(chain, lo, mid)
        stack.append((lo, mid, left))
        stack.append((mid, hi, cnt - left))
    dp = [i * p[i] for i in range(1, len(p))]
    return sorted(_refine(p, dp, lo, hi, tol) for lo, hi in isolated)
