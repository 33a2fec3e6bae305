import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralcut.poly import (BranchSqrt, DegeneratePointError, Potential, eval_potential,
                              eval_w, poly_roots, positive_part_quotient)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def test_cubic_potential_has_no_constant_term():
    assert eval_potential(Potential.cubic(1.3 - 0.2j), 0) == 0


def test_cubic_potential_value():
    assert eval_potential(Potential.cubic(1), 1) == pytest.approx(-2 / 3, abs=1e-15)


def test_gaussian_potential_value():
    assert eval_potential(Potential.gaussian(), 2) == pytest.approx(2)


def test_potential_derivative_vanishes_at_critical_points():
    p = Potential((0.3 + 0.1j, -1.0, 0.5j))
    assert p.n == 3
    for a in p.critical_points:
        assert abs(p.dW(a)) < 1e-12
    assert p.W_coeffs[0] == pytest.approx(1 / 4)


def test_w_outside_gaussian_cut():
    b = BranchSqrt((-2, 2))
    assert eval_w(b, 3) == pytest.approx(cmath.sqrt(5))


@given(st.lists(cplx, min_size=2, max_size=6, unique=True).filter(lambda v: len(v) % 2 == 0))
def test_w_normalized_at_infinity(pts):
    b = BranchSqrt(tuple(pts))
    scale = max(1.0, max(abs(p) for p in pts))
    for ang in np.linspace(0, 2 * np.pi, 7):
        z = 1e6 * scale * cmath.exp(1j * ang)
        assert abs(eval_w(b, z) / z ** b.s - 1) < 1e-5


def test_sides_of_gaussian_cut_are_opposite():
    b = BranchSqrt((-2, 2))
    plus, minus = eval_w(b, 0, "plus"), eval_w(b, 0, "minus")
    assert abs(plus + minus) < 1e-15
    assert abs(plus) == pytest.approx(2)


def test_sides_match_limits_from_either_side():
    b = BranchSqrt((-1 - 1j, 1 + 0.5j, 2 + 2j, 3 - 1j))
    a0, a1 = b.pairs[0]
    z = a0 + 0.3 * (a1 - a0)
    normal = 1j * (a1 - a0) / abs(a1 - a0)  # left of the oriented segment
    assert abs(eval_w(b, z, "plus") - eval_w(b, z + 1e-9 * normal)) < 1e-6
    assert abs(eval_w(b, z, "minus") - eval_w(b, z - 1e-9 * normal)) < 1e-6


def test_one_sided_value_at_branch_point_is_rejected():
    b = BranchSqrt((-2, 2))
    with pytest.raises(DegeneratePointError):
        eval_w(b, 2, "plus")


def _transport(b, center, radius, n=400):
    """Continue w along a circle by picking the sign closest to the previous value."""
    zs = center + radius * np.exp(2j * np.pi * np.arange(n + 1) / n)
    val = complex(b(zs[0]))
    start = val
    for z in zs[1:]:
        cand = complex(b(z))
        val = cand if abs(cand - val) < abs(cand + val) else -cand
    return start, val


@settings(max_examples=25, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4, unique=True))
def test_monodromy_flips_around_one_branch_point(pts):
    b = BranchSqrt(tuple(pts))
    p = pts[0]
    gap = min(abs(p - q) for q in pts[1:])
    if gap < 1e-2:
        return
    start, end = _transport(b, p, gap / 3)
    assert abs(start + end) < 1e-8 * max(1.0, abs(start))


@settings(max_examples=25, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4, unique=True))
def test_monodromy_trivial_around_a_whole_cut(pts):
    b = BranchSqrt(tuple(pts))
    a, c = b.pairs[0]
    others = b.pairs[1]
    center, half = (a + c) / 2, abs(c - a) / 2
    radius = 1.5 * half + 1e-3
    if min(abs(z - center) for z in others) < 2 * radius:
        return
    start, end = _transport(b, center, radius)
    assert abs(start - end) < 1e-8 * max(1.0, abs(start))


def test_quotient_gaussian_is_one():
    h = positive_part_quotient(Potential.gaussian(), BranchSqrt((-2, 2)))
    assert np.allclose(h, [1])


def test_quotient_cubic_one_cut():
    a, b = -0.7 + 0.2j, 1.9 - 0.4j
    h = positive_part_quotient(Potential.cubic(1.1), BranchSqrt((a, b)))
    assert np.allclose(h, [1, (a + b) / 2], atol=1e-14)


def test_quotient_cubic_two_cut_is_one():
    h = positive_part_quotient(Potential.cubic(1.0), BranchSqrt((-1.2, -0.8, 0.7, 1.3)))
    assert np.allclose(h, [1])


@settings(max_examples=30, deadline=None)
@given(st.lists(cplx, min_size=3, max_size=3), st.lists(cplx, min_size=2, max_size=2, unique=True))
def test_quotient_matches_at_large_z(t, pts):
    p = Potential(tuple(t))
    b = BranchSqrt(tuple(pts))
    h = positive_part_quotient(p, b)
    assert len(h) - 1 + b.s == p.n
    scale = 1 + max(abs(x) for x in list(t) + list(pts))
    # W' - h w = O(z^{s-1}): the ratio to z^s must decay like 1/z
    ratios = []
    for R in (1e3 * scale, 1e4 * scale):
        z = R * cmath.exp(0.37j)
        ratios.append(abs(p.dW(z) - np.polyval(h, z) * eval_w(b, z)) / R ** b.s)
    assert ratios[1] < 0.2 * ratios[0] + 1e-9


@pytest.mark.parametrize("coeffs, expected", [
    ([1, 0, -1], [-1, 1]),
    ([1, 0.5 - 2j], [-0.5 + 2j]),
    ([1, 0, -1, 0], [-1, 0, 1]),
])
def test_roots_of_simple_polynomials(coeffs, expected):
    roots = sorted(poly_roots(coeffs), key=lambda r: (r.real, r.imag))
    assert np.allclose(roots, expected, atol=1e-13)


@given(st.lists(cplx, min_size=1, max_size=6))
def test_roots_have_small_residual(rts):
    c = np.poly(rts)
    for r in poly_roots(c):
        assert abs(np.polyval(c, r)) <= 1e-9 * max(1.0, np.max(np.abs(c)))


def test_zero_polynomial_is_rejected():
    with pytest.raises(ValueError):
        poly_roots([0, 0])
