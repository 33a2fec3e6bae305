import cmath
import math

import numpy as np
import pytest

from conftest import W_FIG, assert_periods
from spectralcut.critical import open_split, refine_crossing, split_point
from spectralcut.curve import continue_two_cut, one_cut_cubic_curve, puiseux_two_cut, solve_two_cut_cubic
from spectralcut.prepotential import gaussian_curve
from spectralcut.stokes import (G_eval, TurningPoint, degeneration_warnings, detect_criticality,
                                emission_angles, minimal_cut_exists, stokes_graph,
                                trace_stokes_line, turning_points)

GL_X, GL_W = np.polynomial.legendre.leggauss(12)


@pytest.fixture(scope="module")
def critical_S():
    return {2: complex(-0.5, refine_crossing(W_FIG, 2, -0.5, -2.5146)),
            0: complex(-0.5, refine_crossing(W_FIG, 0, -0.5, -0.388))}


@pytest.fixture(scope="module")
def two_cut_pair(critical_S):
    """Two-cut curves near the branch-2 split: equal phases, and S₂ rotated by π/30."""
    S = critical_S[2]
    one, alpha, _ = split_point(W_FIG, 2, S)
    S1 = 99 * S / 200
    equal = open_split(W_FIG, one, alpha, S1, S1)
    path = [(S1, S1 * cmath.exp(1j * math.pi / 30 * t)) for t in np.linspace(0, 1, 11)]
    rotated = continue_two_cut(W_FIG, path, equal)[-1]
    assert_periods(equal)
    assert_periods(rotated)
    return equal, rotated


def _finite_pairs(graph):
    return {frozenset((l.start, l.terminus[1])) for l in graph.lines if l.finite}


def _y_along(curve, pts, y_start):
    """∫ y dz along a polyline, continuing the branch of y from ``y_start``."""
    total, y_prev = 0j, y_start
    for za, zb in zip(pts[:-1], pts[1:]):
        z = za + (zb - za) * (GL_X + 1) / 2
        vals = []
        for zk in z:
            v = complex(curve.y(zk))
            v = v if abs(v - y_prev) <= abs(v + y_prev) else -v
            vals.append(v)
            y_prev = v
        total += (zb - za) / 2 * np.dot(GL_W, vals)
    return total


def _self_intersects(pts):
    p1, p2 = pts[:-1], pts[1:]
    n = len(p1)
    d = p2 - p1
    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j < n - 1] if abs(pts[0] - pts[-1]) < 1e-12 else j
        if len(j) == 0:
            continue
        a, b = p1[i], p2[i]
        c, e = p1[j], p2[j]

        def cross(u, v):
            return (np.conj(u) * v).imag

        s1 = cross(b - a, c - a) * cross(b - a, e - a)
        s2 = cross(e - c, a - c) * cross(e - c, b - c)
        if np.any((s1 < 0) & (s2 < 0)):
            return True
    return False


# -- turning points ----------------------------------------------------------

def test_gaussian_turning_points():
    tps = turning_points(gaussian_curve(1.0))
    assert sorted(t.location.real for t in tps) == pytest.approx([-2, 2])
    assert all(t.multiplicity == 1 for t in tps)


def test_cubic_one_cut_turning_points():
    curve = one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2)
    tps = turning_points(curve)
    simple = [t.location for t in tps if t.multiplicity == 1]
    double = [t.location for t in tps if t.multiplicity == 2]
    c = curve.cuts[0]
    assert simple == [c.a_minus, c.a_plus]
    assert double == pytest.approx([-c.beta])
    for t in tps:
        assert abs(curve.y_squared(t.location)) < 1e-10


def test_cubic_two_cut_turning_points():
    curve = solve_two_cut_cubic(1.0, 0.02, 0.03, puiseux_two_cut(1.0, 0.02, 0.03))
    tps = turning_points(curve)
    assert len(tps) == 4 and all(t.multiplicity == 1 for t in tps)


def test_near_coincident_points_are_flagged():
    tps = [TurningPoint(1.0, 1, "branch", "p"), TurningPoint(1.0 + 1e-12, 1, "branch", "q")]
    assert degeneration_warnings(tps)
    assert not degeneration_warnings([TurningPoint(1.0, 1), TurningPoint(2.0, 1)])


# -- G -------------------------------------------------------------------------

def test_G_vanishes_at_first_endpoint():
    curve = one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2)
    assert G_eval(curve, 0, curve.cuts[0].a_minus) == 0


@pytest.mark.parametrize("S, k", [(-0.5 - 3j, 2), (0.3 + 0.2j, 1), (-0.5 - 0.5j, 0)])
def test_G_at_second_endpoint_is_the_period(S, k):
    curve = one_cut_cubic_curve(W_FIG, S, k)
    G = G_eval(curve, 0, curve.cuts[0].a_plus)
    assert abs(G.real) < 1e-10
    assert G.imag == pytest.approx(2 * math.pi * abs(S), rel=1e-10)


def test_G_is_real_free_on_the_gaussian_cut():
    S = 0.8 + 0.6j
    curve = gaussian_curve(S)
    r = 2 * cmath.sqrt(S)
    for t in np.linspace(-0.9, 0.9, 7):
        assert abs(G_eval(curve, 0, t * r).real) < 1e-10


def test_real_part_of_G_is_path_independent():
    curve = one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2)
    c = curve.cuts[0]
    z = c.beta + 1.7 * c.delta * 1j
    # both paths stay on the same side of the cut and away from -β
    left = 1j * c.delta / abs(c.delta)
    p1 = [c.a_minus + 0.5 * left]
    p2 = [c.a_minus + 0.8 * left, c.beta + 1.0 * c.delta * 1j]
    g1, g2 = G_eval(curve, 0, z, p1), G_eval(curve, 0, z, p2)
    assert abs(g1.real - g2.real) < 1e-8


def test_G_rejects_path_through_turning_point():
    curve = one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2)
    alpha = -curve.cuts[0].beta
    with pytest.raises(ValueError):
        G_eval(curve, 0, alpha + 0.3, [alpha - 0.3])


# -- tracing ---------------------------------------------------------------------

def test_gaussian_line_is_the_cut():
    S = 1.0
    curve = gaussian_curve(S)
    tps = turning_points(curve)
    angles = emission_angles(curve, tps[0], 0.0)
    ang = min(angles, key=lambda t: abs(cmath.exp(1j * t) - 1))
    line = trace_stokes_line(curve, 0, ang, 0.0, tps)
    assert line.terminus == ("point", 1)
    assert np.max(np.abs(line.samples.imag)) < 1e-6


@pytest.mark.parametrize("S, joined", [(-0.5 - 3j, True), (-0.5 - 2j, False)])
def test_cubic_branch_two_finite_line(S, joined):
    curve = one_cut_cubic_curve(W_FIG, S, 2)
    graph = stokes_graph(curve)
    assert (frozenset((0, 1)) in _finite_pairs(graph)) is joined


def test_emission_angle_spacing():
    curve = one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2)
    ph = cmath.phase(curve.cuts[0].S)
    for tp in turning_points(curve):
        angles = np.sort(np.mod(emission_angles(curve, tp, ph), 2 * np.pi))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
        target = 2 * np.pi / 3 if tp.multiplicity == 1 else np.pi / 2
        assert np.all(np.abs(gaps - target) < np.radians(1))


def test_real_part_of_G_along_traced_lines():
    curve = one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2)
    graph = stokes_graph(curve)
    S = curve.cuts[0].S
    bound = 1e-6 * 2 * math.pi * abs(S)
    e = cmath.exp(-1j * cmath.phase(S))
    for line in graph.lines:
        pts = line.samples[1:]
        if len(pts) < 2:
            continue
        # Re G is constant along the line; measure its drift from the first sample
        drift = 0.0
        y0 = complex(curve.y(pts[0]))
        acc, y_prev = 0j, y0
        for k in range(1, min(len(pts), 400)):
            acc += _y_along(curve, pts[k - 1:k + 1], y_prev)
            v = complex(curve.y(pts[k]))
            y_prev = v if abs(v - y_prev) <= abs(v + y_prev) else -v
            drift = max(drift, abs((e * acc).real))
        assert drift < bound, (line.start, drift)


def test_traced_lines_do_not_self_intersect():
    graph = stokes_graph(one_cut_cubic_curve(W_FIG, -0.5 - 2j, 2))
    for line in graph.lines:
        assert not _self_intersects(np.asarray(line.samples))


# -- graphs ------------------------------------------------------------------------

def test_gaussian_graph():
    graph = stokes_graph(gaussian_curve(1.0))
    assert _finite_pairs(graph) == {frozenset((0, 1))}
    assert sum(not l.finite for l in graph.lines) == 4
    flag, witness = minimal_cut_exists(graph, 0)
    assert flag and witness.finite


def test_each_turning_point_emits_the_right_number_of_lines():
    graph = stokes_graph(one_cut_cubic_curve(W_FIG, -0.5 - 3j, 2))
    counts = [sum(l.start == i for l in graph.lines) for i in range(len(graph.turning_points))]
    assert counts == [3, 3, 4]


@pytest.mark.parametrize("S, k, expected", [(-0.5 - 3j, 2, True), (-0.5 - 2j, 2, False),
                                             (-0.5 - 0.5j, 0, True), (-0.5 - 0.3j, 0, True)])
def test_minimal_cut_verdicts(S, k, expected):
    graph = stokes_graph(one_cut_cubic_curve(W_FIG, S, k))
    assert minimal_cut_exists(graph, 0)[0] is expected


@pytest.mark.parametrize("S, k", [(-0.5 - 3j, 2), (-0.5 - 2j, 2), (-0.5 - 0.3j, 0)])
def test_verdicts_are_scale_invariant(S, k):
    lam = 1.3
    base = stokes_graph(one_cut_cubic_curve(W_FIG, S, k))
    scaled = stokes_graph(one_cut_cubic_curve(lam ** 2 * W_FIG, lam ** 3 * S, k))
    assert base.minimal_cut_flags == scaled.minimal_cut_flags
    assert _finite_pairs(base) == _finite_pairs(scaled)


def test_branch_two_critical_curve_has_zero_on_cut(critical_S):
    curve = one_cut_cubic_curve(W_FIG, critical_S[2], 2)
    graph = stokes_graph(curve)
    ev = [e for e in graph.events if e["type"] == "zero-on-cut"]
    assert ev
    assert abs(ev[0]["location"] + curve.cuts[0].beta) < 1e-12
    # both endpoints run into -β, so the double root lies on the would-be cut
    pairs = _finite_pairs(graph)
    assert {frozenset((0, 2)), frozenset((1, 2))} <= pairs


def test_branch_zero_critical_curve_has_extra_finite_line(critical_S):
    graph = stokes_graph(one_cut_cubic_curve(W_FIG, critical_S[0], 0))
    pairs = _finite_pairs(graph)
    assert frozenset((0, 1)) in pairs and frozenset((1, 2)) in pairs
    assert any(e["type"] == "finite-line-to-zero" for e in graph.events)


def test_equal_phases_do_not_cross(two_cut_pair):
    equal, _ = two_cut_pair
    graph = stokes_graph(equal)
    assert graph.minimal_cut_flags == [True, True]
    assert not [e for e in detect_criticality(graph) if e["type"] == "line-crossing"]


def test_rotated_phase_gives_one_crossing(two_cut_pair):
    _, rotated = two_cut_pair
    graph = stokes_graph(rotated)
    assert len([e for e in detect_criticality(graph) if e["type"] == "line-crossing"]) == 1
