"""Univariate real-root isolation."""

import numpy as np
import pytest

from p1ac import sturm


def test_known_roots():
    # (z - 1)(z + 2) = z^2 + z - 2, ascending coefficients
    roots = sturm.real_roots([-2.0, 1.0, 1.0])
    assert np.allclose(roots, [-2.0, 1.0], atol=1e-12)


def test_eight_clean_roots():
    target = [1, -1, 2, -2, 0.5, -0.5, 3, -3]
    p = np.polynomial.polynomial.polyfromroots(target)
    roots = sturm.real_roots(list(p))
    assert np.allclose(roots, sorted(target), atol=1e-9)


def test_no_real_roots():
    assert sturm.real_roots([1.0, 0.0, 1.0]) == []          # z^2 + 1
    assert sturm.real_roots([2.0]) == []                     # constant


def test_degree_collapse():
    # leading coefficients that are numerically zero are trimmed
    roots = sturm.real_roots([-1.0, 1.0, 1e-20, 1e-20])
    assert np.allclose(roots, [1.0], atol=1e-9)


def test_matches_companion_matrix_on_random_degree_eight(rng):
    for _ in range(400):
        p = rng.normal(size=9)
        reference = sorted(r.real for r in np.roots(p[::-1])
                           if abs(r.imag) < 1e-10)
        mine = sturm.real_roots(list(p))
        assert len(mine) == len(reference)
        if reference:
            assert np.allclose(mine, reference, atol=1e-7)


def test_counting_interval_convention(rng):
    p = [-2.0, 1.0, 1.0]      # roots -2 and 1
    chain = sturm.sturm_chain(p)
    assert sturm.count_roots(chain, -3.0, 2.0) == 2
    assert sturm.count_roots(chain, -3.0, 0.0) == 1
    assert sturm.count_roots(chain, -3.0, 1.0) == 2   # (a, b] includes b
    assert sturm.count_roots(chain, 1.5, 3.0) == 0
