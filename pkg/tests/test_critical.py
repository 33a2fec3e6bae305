import cmath
import math

import numpy as np
import pytest

from conftest import W_FIG
from spectralcut.critical import (GeometryError, critical_lambda_E, critical_loci_S, critical_residual_at,
                                  critical_residual_lambda, critical_residual_S, lambda_loci, lambda_to_S,
                                  locus_crossings, point_in_polygon, refine_crossing,
                                  residual_by_quadrature, splitting_scan, sw_singularity_check,
                                  trace_locus_S)
from spectralcut.curve import one_cut_cubic_curve, one_cut_cubic_from_beta
from spectralcut.prepotential import d2F_one_cut, d3F_one_cut
from spectralcut.stokes import minimal_cut_exists, stokes_graph


@pytest.fixture(scope="module")
def loci():
    return {k: critical_loci_S(W_FIG, k) for k in (0, 2)}


def _oval(loci, k):
    closed = [l for l in loci[k] if l.closed]
    assert len(closed) == 1
    return closed[0]


def _dist(p, poly):
    a, b = poly[:-1], poly[1:]
    d = b - a
    t = np.clip(((p - a) * np.conj(d)).real / np.maximum(np.abs(d) ** 2, 1e-300), 0, 1)
    return float(np.min(np.abs(a + t * d - p)))


def _hausdorff(p, q):
    return max(max(_dist(x, q) for x in p), max(_dist(x, p) for x in q))


# -- residual ------------------------------------------------------------------------

@pytest.mark.parametrize("S, k", [(-0.5 - 2.514668j, 2), (-0.5 - 0.388126j, 0)])
def test_residual_vanishes_at_reference_points(S, k):
    assert abs(critical_residual_S(W_FIG, S, k)) < 1e-3


def test_closed_form_matches_quadrature(rng):
    for _ in range(20):
        S = complex(rng.uniform(-1.5, 1.5), rng.uniform(-3, 3))
        k = int(rng.integers(0, 3))
        quad = residual_by_quadrature(W_FIG, S, k)
        assert abs(quad + 2 * abs(S) * critical_residual_S(W_FIG, S, k)) < 1e-8


def test_residual_rejects_zero():
    with pytest.raises(ValueError):
        critical_residual_S(W_FIG, 0, 2)


@pytest.mark.parametrize("k, im_guess, expected", [(2, -2.51, -2.5147), (0, -0.39, -0.3881)])
def test_crossings_of_the_fixed_real_part(k, im_guess, expected):
    assert refine_crossing(W_FIG, k, -0.5, im_guess) == pytest.approx(expected, abs=1e-4)


# -- S-plane loci -----------------------------------------------------------------------

def test_loci_are_closed_and_accurate(loci):
    for k, expected in ((2, 2.5147), (0, 0.3881)):
        oval = _oval(loci, k)
        assert oval.max_residual < 1e-8
        assert locus_crossings(oval, -0.5) == pytest.approx([-expected, expected], abs=1e-3)
        for S in oval.polyline[::7]:
            assert critical_residual_at(W_FIG, S, k) < 1e-8


def test_branch_two_contains_the_real_segment(loci):
    segs = [l for l in loci[2] if not l.closed]
    assert len(segs) == 1
    pts = segs[0].polyline
    assert np.max(np.abs(pts.imag)) < 1e-9
    assert pts.real.min() == pytest.approx(-1, abs=1e-6) and pts.real.max() == pytest.approx(0, abs=1e-6)


def test_branch_one_has_no_locus():
    assert critical_loci_S(W_FIG, 1) == []


def test_loci_are_conjugation_symmetric(loci):
    for k in (0, 2):
        poly = _oval(loci, k).polyline
        assert _hausdorff(poly, np.conj(poly)) < 1e-3


def test_loci_scale(loci):
    lam = 1.2
    base = _oval(loci, 2).polyline
    scaled = [l for l in critical_loci_S(lam ** 2 * W_FIG, 2) if l.closed][0].polyline
    assert _hausdorff(lam ** 3 * base, scaled) < 1e-3 * lam ** 3


def test_single_trace_runs_between_singular_points():
    # the branch-0 oval passes through S = 0 and a branch point, where the
    # tracer stops; the chained loop is tested above
    from spectralcut.curve import branch_points_S
    seed = complex(-0.5, refine_crossing(W_FIG, 0, -0.5, -0.39))
    arc = trace_locus_S(W_FIG, 0, seed)
    assert not arc.closed
    ends = [0j, *branch_points_S(W_FIG)]
    for p in (arc.polyline[0], arc.polyline[-1]):
        assert min(abs(p - e) for e in ends) < 1e-9
    assert _dist(seed, arc.polyline) < 1e-12


@pytest.mark.parametrize("k, inside, outside, verdicts", [
    (2, -0.5 - 2j, -0.5 - 3j, (False, True)),
    (0, -0.5 - 0.3j, -0.5 - 0.5j, (True, True)),
])
def test_verdicts_on_either_side(loci, k, inside, outside, verdicts):
    poly = _oval(loci, k).polyline
    assert point_in_polygon(inside, poly) and not point_in_polygon(outside, poly)
    got = tuple(minimal_cut_exists(stokes_graph(one_cut_cubic_curve(W_FIG, S, k)), 0)[0]
                for S in (inside, outside))
    assert got == verdicts


# -- λ plane -----------------------------------------------------------------------------

def test_lambda_singular_inputs():
    for lam in (0, W_FIG):
        with pytest.raises(ValueError):
            critical_residual_lambda(W_FIG, lam, 1)


def test_lambda_sign_factors_multiply_to_minus_one(rng):
    for _ in range(10):
        lam = complex(rng.uniform(-1, 3), rng.uniform(-2, 2))
        Ep, refs = critical_lambda_E(W_FIG, lam, 1)
        Em, _ = critical_lambda_E(W_FIG, lam, -1, refs)
        # the two log arguments multiply to -1 and the rational terms cancel
        assert cmath.exp(Ep + Em) == pytest.approx(-1, abs=1e-10)
        assert critical_residual_lambda(W_FIG, lam, "+", refs) == pytest.approx(
            -critical_residual_lambda(W_FIG, lam, "minus", refs), abs=1e-12)


def test_lambda_locus_is_two_ovals_one_around_w():
    ovals = lambda_loci(W_FIG, 1)
    assert len(ovals) == 2 and all(o.closed for o in ovals)
    assert [point_in_polygon(W_FIG, o.polyline) for o in ovals].count(True) == 1
    for o in ovals:
        assert o.max_residual < 1e-8
    # the minus-sign locus is the same set
    for o in ovals:
        for lam in o.polyline[1::9]:
            assert abs(critical_residual_lambda(W_FIG, lam, -1)) < 1e-8


def test_lambda_locus_maps_onto_S_locus(loci):
    ovals = lambda_loci(W_FIG, 1)
    for o in ovals:
        for lam in o.polyline[::5]:
            if abs(lam) < 1e-6 or abs(lam - W_FIG) < 1e-6:
                continue
            for sign in (1, -1):
                S = lambda_to_S(W_FIG, lam, sign)
                if abs(S) < 1e-6:
                    continue
                assert min(critical_residual_at(W_FIG, S, k) for k in range(3)) < 1e-7
    # and the images cover the traced S-plane ovals
    images = np.concatenate([[lambda_to_S(W_FIG, lam, s) for lam in o.polyline] for o in ovals for s in (1, -1)])
    for k in (0, 2):
        for S in _oval(loci, k).polyline[::11]:
            assert np.min(np.abs(images - S)) < 0.05


# -- splitting ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def report():
    return splitting_scan(W_FIG)


def test_splitting_report(report):
    assert report.T_c == pytest.approx(-2.514668, abs=1e-5)
    assert abs(report.jumps["F"]) < 1e-8
    assert abs(report.jumps["dF"]) < 1e-4
    S_c = report.samples["S_c"]
    one = one_cut_cubic_curve(W_FIG, S_c, 2)
    assert report.Lambda_c_sq == pytest.approx(cmath.exp(-d2F_one_cut(one)), rel=1e-12)
    for r in report.field_equation_residuals.values():
        assert np.max(np.abs(r)) < 1e-6


def test_splitting_samples_are_consistent(report):
    ratio = report.samples["ratio"]
    assert 0 < ratio < 1
    alpha = report.samples["alpha"]
    S_c = report.samples["S_c"]
    assert alpha == pytest.approx(-one_cut_cubic_curve(W_FIG, S_c, 2).cuts[0].beta, abs=1e-12)


def test_splitting_needs_a_crossing():
    with pytest.raises(GeometryError):
        splitting_scan(W_FIG, re_s=5.0)


# -- SW singularity ---------------------------------------------------------------------------

def test_sw_singularity_check():
    rep = sw_singularity_check(W_FIG)
    assert rep["h_sum"] == 0
    a, b = rep["endpoints"]
    assert b == pytest.approx(math.sqrt(2 * W_FIG)) and a == pytest.approx(-b)
    assert rep["minimal_cut_per_phase"] == [False, False]
    assert rep["minimal_cut"] is False


def test_third_derivative_near_lambda_equal_w():
    # λ = w - β²; as λ -> w the one-cut d3F vanishes like sqrt(w - λ), so the
    # response 1/d3F of the vacuum to log Λ^{2N} blows up
    vals = []
    for gap in (1e-2, 1e-4, 1e-6):
        vals.append(abs(d3F_one_cut(one_cut_cubic_from_beta(W_FIG, math.sqrt(gap)))))
    assert vals[0] / vals[1] == pytest.approx(10, rel=0.05)
    assert vals[1] / vals[2] == pytest.approx(10, rel=0.01)
    assert 1 / vals[-1] > 1e3
