"""Critical loci of the one-cut cubic model and cut-splitting scans.

A one-cut curve of W = z³/3 - w z on branch k is critical when the double
root -β_k lies on the Stokes line through the cut, i.e. when
Re G_k(-β_k) = 0.  In closed form this is Re E = 0 with

    E = (w / 3S) sqrt(q) + log((-2β + sqrt(q)) / (-δ)),   q = 6β² - 2w,

and Re G_k(-β_k) = -2|S| Re E for the branch of sqrt(q) selected by the
first sheet of y.  Flipping the sign of sqrt(q) maps E to -E, so the zero
set does not depend on it, but a scan must continue the square root
smoothly to avoid spurious sign changes.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .curve import (
    TWO_PI_I,
    ContinuationError,
    CutSpec,
    SolverError,
    SpectralCurve,
    branch_points_S,
    continue_two_cut,
    cubic_beta,
    linear_path,
    one_cut_cubic_curve,
    solve_two_cut_cubic,
)
from .poly import Potential
from .quad import QuadratureError

log = logging.getLogger(__name__)


class GeometryError(ValueError):
    """A scan path does not cross the requested locus transversally."""


@dataclass
class CriticalLocus:
    branch: int
    plane: str  # "S" or "lambda+" / "lambda-"
    polyline: np.ndarray
    closed: bool
    max_residual: float = 0.0
    status: str = "ok"


@dataclass
class SplittingReport:
    T_c: float
    jumps: dict
    Lambda_c_sq: complex
    errors: dict = field(default_factory=dict)
    third_order: bool = False
    samples: dict = field(default_factory=dict)
    field_equation_residuals: dict = field(default_factory=dict)


# -- S-plane residual -----------------------------------------------------------

def _pick(root, ref):
    if ref is None:
        return root
    return root if abs(root - ref) <= abs(root + ref) else -root


def critical_E(w, S, k, sqrt_ref=None):
    """(E, sqrt(q), β) on branch k; sqrt(q) is the root nearest ``sqrt_ref``."""
    w, S = complex(w), complex(S)
    if S == 0:
        raise ValueError("S must be nonzero")
    beta = cubic_beta(w, S, k)
    q = 6 * beta * beta - 2 * w
    sq = _pick(cmath.sqrt(q), sqrt_ref)
    delta = cmath.sqrt(2 * S / beta)
    E = w / (3 * S) * sq + cmath.log((-2 * beta + sq) / (-delta))
    return E, sq, beta


def residual_by_quadrature(w, S, k, n=200):
    """Re[e^{-i arg S} ∫_a^{-β} y dz] along the straight path on the first sheet."""
    curve = one_cut_cubic_curve(w, S, k)
    c = curve.cuts[0]
    a, target = c.a_minus, -c.beta
    x, wts = np.polynomial.legendre.leggauss(n)
    t = (x + 1) / 2
    z = a + (target - a) * t * t  # the substitution removes the endpoint square root
    integral = np.dot(wts / 2, curve.y(z) * 2 * (target - a) * t)
    return float((cmath.exp(-1j * cmath.phase(S)) * integral).real)


def _seed_sign(w, S, k):
    """sqrt(q) chosen so that -2|S| Re E reproduces the quadrature value of Re G."""
    E, sq, _ = critical_E(w, S, k)
    g = residual_by_quadrature(w, S, k)
    if (-2 * abs(S) * E.real) * g < 0:
        sq = -sq
    return sq


def critical_residual_S(w, S, k, sqrt_ref=None):
    """Re E at S on branch k.

    Without ``sqrt_ref`` the square-root branch is seeded from the direct
    quadrature of Re G_k(-β_k), so that Re G = -2|S| × (returned value).
    """
    if complex(S) == 0:
        raise ValueError("S must be nonzero")
    if sqrt_ref is None:
        try:
            sqrt_ref = _seed_sign(w, S, k)
        except (QuadratureError, FloatingPointError, ValueError):
            return residual_by_quadrature(w, S, k) / (-2 * abs(complex(S)))
    E, _, _ = critical_E(w, S, k, sqrt_ref)
    return float(E.real)


def _dE(w, S, k, sq, h):
    Ep, _, _ = critical_E(w, S + h, k, sq)
    Em, _, _ = critical_E(w, S - h, k, sq)
    return (Ep - Em) / (2 * h)


def seed_locus_S(w, k, re_s=None, im_range=None, n=400):
    """Points of the branch-k locus on the vertical line Re S = re_s.

    The residual is evaluated along the line with sqrt(q) continued from
    sample to sample; sign changes are refined by bisection and kept only
    where the residual actually vanishes (jumps of the branch labelling
    also change sign).
    """
    w = complex(w)
    scale = abs(w) ** 1.5
    re_s = -scale / 4 if re_s is None else re_s
    lo, hi = im_range if im_range is not None else (-2 * scale, 2 * scale)
    ys = np.linspace(lo, hi, n)
    vals, sqs = [], []
    sq = None
    for y in ys:
        S = complex(re_s, y)
        if abs(S) < 1e-12:
            vals.append(np.nan)
            sqs.append(sq)
            continue
        E, sq, _ = critical_E(w, S, k, sq)
        vals.append(E.real)
        sqs.append(sq)
    seeds = []
    for i in range(n - 1):
        v0, v1 = vals[i], vals[i + 1]
        if not (np.isfinite(v0) and np.isfinite(v1)) or v0 * v1 > 0:
            continue
        a, b, sa = ys[i], ys[i + 1], sqs[i]
        fa = v0
        for _ in range(60):
            m = (a + b) / 2
            E, sm, _ = critical_E(w, complex(re_s, m), k, sa)
            if E.real * fa <= 0:
                b = m
            else:
                a, fa, sa = m, E.real, sm
        S = complex(re_s, (a + b) / 2)
        E, _, _ = critical_E(w, S, k, sa)
        if abs(E.real) < 1e-8:
            seeds.append(S)
    return seeds


def trace_locus_S(w, k, seed=None, step=None, tol=1e-10, max_steps=5000):
    """Predictor-corrector trace of the branch-k critical locus through ``seed``.

    Re E is harmonic in S, so the level set is followed along i / E'(S)
    and corrected along the gradient conj(E').  The trace runs in both
    directions from the seed until it closes, reaches S = 0 or a branch
    point S_±, or the corrector fails.
    """
    w = complex(w)
    scale = abs(w) ** 1.5
    step = step or 1e-2 * scale
    if seed is None:
        seeds = seed_locus_S(w, k)
        if not seeds:
            return CriticalLocus(k, "S", np.zeros(0, dtype=complex), False, 0.0, "no-locus")
        seed = seeds[0]
    seed = complex(seed)
    sq0 = _seed_sign(w, seed, k)
    seed, sq0 = _correct(w, seed, k, sq0, tol, step)
    stops = [0j] + list(branch_points_S(w))

    def run(sign):
        pts = [seed]
        S, sq = seed, sq0
        prev_dir = None
        status = "max-steps"
        for it in range(max_steps):
            dE = _dE(w, S, k, sq, 1e-6 * scale)
            d = 1j / dE
            d /= abs(d)
            if prev_dir is None:
                d *= sign
            elif (d * np.conj(prev_dir)).real < 0:
                d = -d
            h = step
            for _ in range(30):
                Sp = S + h * d
                try:
                    Sn, sqn = _correct(w, Sp, k, sq, tol, h)
                except (SolverError, ZeroDivisionError, ValueError, FloatingPointError):
                    h /= 2
                    continue
                if abs(Sn - S) < 2 * h and abs(Sn - Sp) < 0.5 * h:
                    break
                h /= 2
            else:
                status = "corrector-failed"
                break
            prev_dir = (Sn - S) / abs(Sn - S)
            S, sq = Sn, sqn
            pts.append(S)
            if it > 3 and abs(S - seed) < 2 * step:
                pts.append(seed)
                status = "closed"
                break
            near = [p for p in stops if abs(S - p) < 2 * step]
            if near:
                pts.append(near[0])
                status = "endpoint"
                break
        return pts, status

    fwd, st1 = run(1.0)
    if st1 == "closed":
        poly = np.array(fwd)
        closed = True
        status = "closed"
    else:
        bwd, st2 = run(-1.0)
        poly = np.array(bwd[::-1] + fwd[1:])
        closed = False
        status = f"{st2}/{st1}"
    res = max(abs(critical_residual_at(w, S, k, poly)) for S in poly[:: max(1, len(poly) // 50)])
    return CriticalLocus(k, "S", poly, closed, res, status)


def critical_residual_at(w, S, k, poly=None):
    """|Re E| at S (independent of the square-root branch); 0 at S = 0 and S_±."""
    if any(abs(S - p) < 1e-12 for p in [0j, *branch_points_S(w)]):
        return 0.0
    E, _, _ = critical_E(w, S, k)
    return abs(E.real)


def critical_loci_S(w, k):
    """All arcs of the branch-k locus seeded on Re S = -|w|^{3/2}/4, chained into loops.

    Arcs that end on S = 0 or on a branch point S_± are joined end to end
    when they share that point.
    """
    arcs = []
    for seed in seed_locus_S(w, k):
        if any(_point_near_polyline(seed, a.polyline, 1e-6) for a in arcs):
            continue
        arcs.append(trace_locus_S(w, k, seed))
    return chain_arcs(arcs, tol=1e-9)


def _key(z, tol):
    return (round(z.real / tol), round(z.imag / tol))


def chain_arcs(arcs, tol):
    open_arcs = [list(a.polyline) for a in arcs if not a.closed]
    out = [a for a in arcs if a.closed]
    k = arcs[0].branch if arcs else -1
    plane = arcs[0].plane if arcs else "S"
    while open_arcs:
        cur = open_arcs.pop(0)
        grown = True
        while grown and not (len(cur) > 2 and abs(cur[0] - cur[-1]) < tol):
            grown = False
            # an arc that closes the loop takes precedence
            order = sorted(range(len(open_arcs)), key=lambda i: not (
                {_key(open_arcs[i][0], tol), _key(open_arcs[i][-1], tol)}
                == {_key(cur[0], tol), _key(cur[-1], tol)}))
            for i in order:
                other = open_arcs[i]
                if abs(cur[-1] - other[0]) < tol:
                    cur += other[1:]
                elif abs(cur[-1] - other[-1]) < tol:
                    cur += other[::-1][1:]
                elif abs(cur[0] - other[-1]) < tol:
                    cur = other[:-1] + cur
                elif abs(cur[0] - other[0]) < tol:
                    cur = other[::-1][:-1] + cur
                else:
                    continue
                open_arcs.pop(i)
                grown = True
                break
        closed = len(cur) > 2 and abs(cur[0] - cur[-1]) < tol
        res = max((a.max_residual for a in arcs), default=0.0)
        out.append(CriticalLocus(k, plane, np.array(cur), closed, res, "closed" if closed else "open"))
    return out


def _correct(w, S, k, sq, tol, h, maxiter=30):
    for _ in range(maxiter):
        E, sqn, _ = critical_E(w, S, k, sq)
        if abs(sqn - sq) > 0.5 * max(abs(sq), 1e-12) and sq is not None:
            raise SolverError("square-root branch jumped")
        sq = sqn
        if abs(E.real) < tol:
            return S, sq
        dE = _dE(w, S, k, sq, 1e-7 * max(1.0, abs(S)))
        S = S - E.real * np.conj(dE) / abs(dE) ** 2
    raise SolverError("corrector did not converge")


def locus_crossings(locus, re_value):
    """Imaginary parts where the locus polyline crosses Re S = re_value."""
    p = locus.polyline
    out = []
    for a, b in zip(p[:-1], p[1:]):
        if (a.real - re_value) * (b.real - re_value) < 0:
            t = (re_value - a.real) / (b.real - a.real)
            out.append(a.imag + t * (b.imag - a.imag))
    return sorted(out)


def refine_crossing(w, k, re_value, im_guess, tol=1e-13):
    """Solve Re E = 0 on the line Re S = re_value near ``im_guess`` (secant method)."""
    sq = _seed_sign(w, complex(re_value, im_guess), k)
    y0, y1 = im_guess, im_guess + 1e-4
    E0, sq0, _ = critical_E(w, complex(re_value, y0), k, sq)
    E1, sq1, _ = critical_E(w, complex(re_value, y1), k, sq0)
    f0, f1 = E0.real, E1.real
    for _ in range(60):
        if f1 == f0:
            break
        y2 = y1 - f1 * (y1 - y0) / (f1 - f0)
        E2, sq2, _ = critical_E(w, complex(re_value, y2), k, sq1)
        y0, f0, y1, f1, sq1 = y1, f1, y2, E2.real, sq2
        if abs(f1) < tol:
            break
    return y1


# -- λ-plane ------------------------------------------------------------------

def critical_lambda_E(w, lam, sign=1, refs=None):
    """The λ-plane expression whose real part vanishes on the critical locus.

    sign · (w/3λ) sqrt(4w - 6λ)/sqrt(w - λ) + log((sqrt(4w - 6λ) - sign·2 sqrt(w - λ))/sqrt(2λ)).

    ``refs`` = (r, s) selects the square-root branches closest to previous
    values of sqrt(4w - 6λ) and sqrt(w - λ).  Flipping either branch flips
    the sign of the real part, so the zero set does not depend on them.
    Returns (value, (r, s)).
    """
    w, lam = complex(w), complex(lam)
    if lam == 0 or lam == w:
        raise ValueError("λ must differ from 0 and w")
    r_ref, s_ref = refs if refs is not None else (None, None)
    r = _pick(cmath.sqrt(4 * w - 6 * lam), r_ref)
    s = _pick(cmath.sqrt(w - lam), s_ref)
    val = sign * w / (3 * lam) * r / s + cmath.log((r - sign * 2 * s) / cmath.sqrt(2 * lam))
    return val, (r, s)


def critical_residual_lambda(w, lam, sign=1, refs=None):
    """Real part of :func:`critical_lambda_E`; ``sign`` is +1 or -1 (or "plus"/"minus")."""
    sign = 1 if sign in (1, "+", "plus") else -1
    val, _ = critical_lambda_E(w, lam, sign, refs)
    return float(val.real)


def lambda_to_S(w, lam, sign=1):
    """S = ±λ sqrt(w - λ) for the vacuum sheet labelled by ``sign``."""
    return sign * lam * cmath.sqrt(complex(w) - lam)


def _lambda_correct(w, lam, sign, tol, maxiter=30):
    """Newton projection onto Re E = 0 with branches frozen at the start point."""
    _, refs = critical_lambda_E(w, lam, sign)
    for _ in range(maxiter):
        v, refs = critical_lambda_E(w, lam, sign, refs)
        if abs(v.real) < tol:
            return lam
        h = 1e-7 * max(1.0, abs(lam))
        d = (critical_lambda_E(w, lam + h, sign, refs)[0]
             - critical_lambda_E(w, lam - h, sign, refs)[0]) / (2 * h)
        if d == 0 or not cmath.isfinite(d):
            raise SolverError("vanishing gradient")
        lam = lam - v.real * np.conj(d) / abs(d) ** 2
    raise SolverError("corrector did not converge")


def _lambda_tangent(w, lam, sign):
    _, refs = critical_lambda_E(w, lam, sign)
    h = 1e-6 * max(1.0, abs(lam))
    d = (critical_lambda_E(w, lam + h, sign, refs)[0]
         - critical_lambda_E(w, lam - h, sign, refs)[0]) / (2 * h)
    t = 1j * np.conj(d)  # orthogonal to the gradient of Re E
    return t / abs(t)


def seed_locus_lambda(w, sign=1, n=600, tol=1e-12):
    """Seeds of the λ-plane locus.

    Scans the line through 0 and w and the perpendicular bisector of 0 and
    2w/3, bisecting sign changes of |Re E| continued along each line.  The
    stretch between 2w/3 and w, where the residual vanishes identically, is
    skipped.
    """
    w = complex(w)
    u = w / abs(w)
    lines = [(u * abs(w) * x, u) for x in np.linspace(-2, 3, n)]
    lines2 = [(u * (w.__abs__() / 3 + 1j * abs(w) * y), 1j * u) for y in np.linspace(-2, 2, n)]
    seeds = []
    for line in (lines, lines2):
        vals, refs = [], None
        for lam, _ in line:
            lam = lam + 1e-9 * abs(w) * 1j * u
            try:
                v, refs = critical_lambda_E(w, lam, sign, refs)
                vals.append(v.real)
            except ValueError:
                vals.append(np.nan)
        for i in range(len(line) - 1):
            if not (np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0):
                continue
            lam0 = (line[i][0] + line[i + 1][0]) / 2 + 1e-9 * abs(w) * 1j * u
            try:
                lam_c = _lambda_correct(w, lam0, sign, tol)
            except (SolverError, ValueError, ZeroDivisionError):
                continue
            on_segment = abs((lam_c / u).imag) < 1e-6 * abs(w) and 2 * abs(w) / 3 - 1e-9 < (lam_c / u).real < abs(w) + 1e-9
            if abs(lam_c - lam0) < 2 * abs(line[1][0] - line[0][0]) and not on_segment:
                seeds.append(lam_c)
    return seeds


def _march(w, sign, seed, t0, step, tol, max_steps, radius):
    pts = [seed]
    lam, prev = seed, t0
    for it in range(max_steps):
        try:
            t = _lambda_tangent(w, lam, sign)
        except (ValueError, ZeroDivisionError):
            t = prev
        if (t * np.conj(prev)).real < 0:
            t = -t
        moved = False
        # step halving first, then hops of a few steps across isolated singular points
        for hs in [step / 2 ** m for m in range(6)] + [3 * step, 6 * step]:
            try:
                ln = _lambda_correct(w, lam + hs * t, sign, tol)
            except (SolverError, ValueError, ZeroDivisionError):
                continue
            dz = ln - lam
            if abs(dz) < 2 * hs and (dz * np.conj(t)).real > 0:
                moved = True
                break
        if not moved:
            return pts, "corrector-failed"
        prev = dz / abs(dz)
        lam = ln
        pts.append(lam)
        if it > 3 and abs(lam - seed) < 2 * step:
            pts.append(seed)
            return pts, "closed"
        if abs(lam) > radius:
            return pts, "escaped"
    return pts, "max-steps"


def trace_locus_lambda(w, sign=1, seed=None, step=None, tol=1e-10, max_steps=5000):
    """Trace one oval of the λ-plane critical locus.

    Predictor-corrector as in the S plane; the square-root branches are
    chosen afresh at each vertex, which is legitimate because the zero set
    of Re E does not depend on them.  The isolated singular points λ = 0
    and λ = 2w/3 on the ovals are crossed by short hops.
    """
    w = complex(w)
    sign = 1 if sign in (1, "+", "plus") else -1
    plane = f"lambda{'+' if sign > 0 else '-'}"
    step = step or 1e-2 * abs(w)
    if seed is None:
        seeds = seed_locus_lambda(w, sign)
        if not seeds:
            return CriticalLocus(-1, plane, np.zeros(0, dtype=complex), False, 0.0, "no-locus")
        seed = seeds[0]
    seed = _lambda_correct(w, complex(seed), sign, tol)
    t0 = _lambda_tangent(w, seed, sign)
    pts, status = _march(w, sign, seed, t0, step, tol, max_steps, 10 * abs(w))
    if status != "closed":
        back, status_b = _march(w, sign, seed, -t0, step, tol, max_steps, 10 * abs(w))
        pts = back[::-1][:-1] + pts
        status = f"{status_b}/{status}"
    poly = np.array(pts)
    res = max(abs(critical_lambda_E(w, l, sign)[0].real) for l in poly)
    return CriticalLocus(-1, plane, poly, status == "closed", res, status)


def split_at_pinch(poly, pinch, tol):
    """Split a closed polyline that passes twice through ``pinch`` into two loops."""
    poly = np.asarray(poly)
    near = np.abs(poly - pinch) < tol
    passages = []
    for i, flag in enumerate(near):
        if flag and (i == 0 or not near[i - 1]):
            passages.append(i)
    if len(passages) != 2:
        return [poly]
    i1, i2 = passages

    def closest(i):
        j = i
        while j + 1 < len(poly) and near[j + 1] and abs(poly[j + 1] - pinch) < abs(poly[j] - pinch):
            j += 1
        return j

    j1, j2 = closest(i1), closest(i2)
    first = np.concatenate([poly[j1:j2 + 1], [poly[j1]]])
    second = np.concatenate([poly[j2:-1], poly[:j1 + 1], [poly[j2]]])
    return [first, second]


def lambda_loci(w, sign=1):
    """The ovals of the λ-plane locus reached from the seed lines.

    A traced curve that runs through the touching point λ = 2w/3 of two
    ovals is split there.
    """
    w = complex(w)
    step = 1e-2 * abs(w)
    loci = []
    for lam0 in seed_locus_lambda(w, sign):
        if any(_point_near_polyline(lam0, l.polyline, 1e-4 * abs(w)) for l in loci):
            continue
        loc = trace_locus_lambda(w, sign, seed=lam0, step=step)
        if not loc.closed:
            loci.append(loc)
            continue
        for part in split_at_pinch(loc.polyline, 2 * w / 3, 3 * step):
            loci.append(CriticalLocus(loc.branch, loc.plane, part, True, loc.max_residual, loc.status))
    return loci


def _point_near_polyline(p, poly, tol):
    if len(poly) == 0:
        return False
    return float(np.min(np.abs(np.asarray(poly) - p))) < max(tol, 3 * np.max(np.abs(np.diff(poly))) if len(poly) > 1 else tol)


def point_in_polygon(p, poly):
    """Even-odd rule for a closed polyline of complex vertices."""
    x, y = p.real, p.imag
    inside = False
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (a.imag > y) != (b.imag > y):
            xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if xc > x:
                inside = not inside
    return inside


# -- splitting of a cut ---------------------------------------------------------

def split_point(w, k, S_c):
    """Degenerate two-cut data at a critical one-cut curve.

    Returns (one-cut curve, α = -β, S₁^c) where S₁^c is the partial period
    of the sub-cut from a to α.  The integral follows the straight path
    a -> α on the first sheet; its sign is fixed by the side of the
    straight cut on which α lies.
    """
    curve = one_cut_cubic_curve(w, S_c, k)
    c = curve.cuts[0]
    a, b, alpha = c.a_minus, c.a_plus, -c.beta
    x, wts = np.polynomial.legendre.leggauss(200)
    t = (x + 1) / 2
    z = a + (alpha - a) * t * t
    I1 = np.dot(wts / 2, curve.y(z) * 2 * (alpha - a) * t)
    side = ((alpha - a) / (b - a)).imag
    S1 = (1 if side > 0 else -1) * I1 / TWO_PI_I
    return curve, alpha, complex(S1)


def open_split(w, curve, alpha, S1, S2, etas=(1e-2, 3e-2, 1e-1)):
    """Two-cut curve near a split point, from guesses with a small gap at α."""
    from .stokes import emission_angles, turning_points

    c = curve.cuts[0]
    tp = [t for t in turning_points(curve) if t.multiplicity == 2][0]
    angles = emission_angles(curve, tp, cmath.phase(c.S))
    # the two finite lines of the critical graph leave α towards a and b; the
    # gap opens along the transverse pair
    along = cmath.phase(c.a_plus - c.a_minus)
    angles = sorted(angles, key=lambda t: -abs(math.sin(t - along)))
    last = None
    for eta in etas:
        for ang in angles:
            u = cmath.exp(1j * ang)
            guess = [c.a_minus, alpha - eta * u, alpha + eta * u, c.a_plus]
            try:
                return solve_two_cut_cubic(w, S1, S2, guess)
            except (SolverError, QuadratureError) as exc:
                last = exc
    raise SolverError(f"could not open the split: {last}")


def _lagrange_derivatives(xs, ys, x0=0.0):
    """Derivatives of orders 0..len(xs)-1 at x0 of the interpolating polynomial."""
    coeffs = np.polyfit(np.asarray(xs) - x0, np.asarray(ys), len(xs) - 1)
    p = np.poly1d(coeffs)
    return [complex(p.deriv(m)(0.0)) if m else complex(p(0.0)) for m in range(len(xs))]


def _richardson(values, orders):
    """One Richardson step per derivative order for step sequence h, h/2, h/4, ...

    ``values[level][m]`` is the order-m estimate; returns (extrapolated, error).
    """
    ext, err = [], []
    for m, p in enumerate(orders):
        seq = [v[m] for v in values]
        r = [(2 ** p * seq[i + 1] - seq[i]) / (2 ** p - 1) for i in range(len(seq) - 1)]
        ext.append(r[-1])
        err.append(abs(r[-1] - r[-2]) if len(r) > 1 else abs(seq[-1] - seq[-2]))
    return ext, err


def splitting_scan(w, k=2, re_s=-0.5, im_guess=None, h=2e-3, levels=4, N_parts=(1, 1),
                   two_cut_side=1):
    """Prepotential across the branch-k split along the vertical path S(T) = re_s + iT.

    The one-cut side uses the closed-form prepotential; the two-cut side
    uses the numeric prepotential on S₁ = r S(T), S₂ = (1 - r) S(T) with
    r = S₁^c / S_c fixed at the split.  One-sided four-point stencils at
    spacings h, h/2, ... give the derivatives at T_c, which are
    Richardson-extrapolated; the report holds the jumps of F, F', F'', F'''
    with their extrapolation errors.
    """
    from .abelian import d2F_matrix_at_split
    from .prepotential import (cubic_prepotential, d2F_one_cut, field_equation_residual,
                               numeric_prepotential, reduce_mod_2pi_i)

    w = complex(w)
    if im_guess is None:
        crossings = [y for y in (seed_locus_S(w, k, re_s=re_s))]
        if not crossings:
            raise GeometryError(f"Re S = {re_s} does not cross the branch-{k} locus")
        im_guess = min(crossings, key=lambda s: s.imag).imag
    T_c = refine_crossing(w, k, re_s, im_guess)
    S_c = complex(re_s, T_c)
    # transversality: the residual must change sign across T_c
    sq = _seed_sign(w, S_c, k)
    lo = critical_E(w, complex(re_s, T_c - 10 * h), k, sq)[0].real
    hi = critical_E(w, complex(re_s, T_c + 10 * h), k, sq)[0].real
    if lo * hi >= 0:
        raise GeometryError("the path does not cross the locus transversally")
    curve_c, alpha, S1c = split_point(w, k, S_c)
    r = S1c / S_c
    if abs(r.imag) > 1e-8 or not 0 < r.real < 1:
        raise GeometryError(f"partial period at the split has the wrong phase (ratio {r})")
    r = r.real
    const = -w ** 3 / 12

    def F_one(T):
        beta = cubic_beta(w, complex(re_s, T), k)
        return cubic_prepotential(w, beta) + const

    two_cut = {}
    hs = [h / 2 ** m for m in range(levels)]
    ts = sorted({j * hh for hh in hs for j in (1, 2, 3, 4)})
    prev = None
    for dt in ts:
        S = complex(re_s, T_c + two_cut_side * dt)
        if prev is None:
            cur = open_split(w, curve_c, alpha, r * S, (1 - r) * S)
        else:
            cur = solve_two_cut_cubic(w, r * S, (1 - r) * S, prev.endpoints)
        prev = cur
        two_cut[dt] = numeric_prepotential(cur).F

    side = {"one": [], "two": []}
    for hh in hs:
        xs = [j * hh for j in (1, 2, 3, 4)]
        side["two"].append(_lagrange_derivatives([two_cut_side * x for x in xs],
                                                  [two_cut[x] for x in xs]))
        side["one"].append(_lagrange_derivatives([-two_cut_side * x for x in xs],
                                                  [F_one(T_c - two_cut_side * x) for x in xs]))
    orders = [4, 3, 2, 1]
    ext2, err2 = _richardson(side["two"], orders)
    ext1, err1 = _richardson(side["one"], orders)
    names = ["F", "dF", "d2F", "d3F"]
    jumps = {n: complex(ext2[m] - ext1[m]) for m, n in enumerate(names)}
    errors = {n: float(err1[m] + err2[m]) for m, n in enumerate(names)}
    d2 = d2F_one_cut(curve_c)
    lam_sq = cmath.exp(-d2)
    N = int(sum(N_parts))
    Lam = cmath.sqrt(lam_sq)
    res1 = field_equation_residual(curve_c, [N], Lam)
    H = d2F_matrix_at_split(curve_c, alpha)
    res2 = np.array([reduce_mod_2pi_i(v) for v in
                     (np.asarray(N_parts) @ H + 2 * N * cmath.log(Lam))])
    third = abs(jumps["d3F"]) > 1e3 * errors["d3F"]
    return SplittingReport(
        T_c=T_c, jumps=jumps, Lambda_c_sq=lam_sq, errors=errors, third_order=bool(third),
        samples={"one_sided_two_cut": ext2, "one_sided_one_cut": ext1, "ratio": r,
                 "alpha": alpha, "S_c": S_c},
        field_equation_residuals={"one_cut": res1, "two_cut": res2})


def sw_singularity_check(w):
    """Criticality of the merged Seiberg-Witten configuration.

    The limit curve has β = 0, δ² = 2w and h(z) = z, so h(a) = -h(b).  The
    merged cut is tested for minimality with the phases of the two-cut
    family just before merging (arg S₂ = arg S₁ + π).
    """
    from .curve import sw_slice_solve
    from .stokes import stokes_graph

    w = complex(w)
    _, merged = sw_slice_solve(w, math.sqrt(2 * abs(w)))
    c = merged.cuts[0]
    ha, hb = complex(merged.h(c.a_minus)), complex(merged.h(c.a_plus))
    S1, _ = sw_slice_solve(w, math.sqrt(2 * abs(w)) * (1 - 1e-3))
    phase1 = cmath.phase(S1)
    phases = [phase1, phase1 + math.pi]
    flags = []
    for ph in phases:
        g = stokes_graph(merged, phases=[ph])
        flags.append(bool(g.minimal_cut_flags[0]))
    return {"h_a": ha, "h_b": hb, "h_sum": abs(ha + hb),
            "endpoints": (c.a_minus, c.a_plus),
            "phases": phases, "minimal_cut_per_phase": flags,
            # minimal only if it is a Stokes line for the phases of both halves
            "minimal_cut": all(flags)}
