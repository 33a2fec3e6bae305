"""Stokes graphs of the differential y(z) dz.

A Stokes line of phase φ emitted by a turning point z0 is a trajectory on
which ``Re e^{-iφ} ∫_{z0}^z y dz' = 0``.  Lines are traced by stepping
along the direction field ``i e^{iφ} / y`` and projecting every step back
onto the level set, with the integral tracked incrementally by
Gauss-Legendre quadrature.  Only the level set matters, so the overall
sign of the branch of y followed along a line is irrelevant.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curve import SpectralCurve

log = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class TraceStallError(RuntimeError):
    """The step size underflowed; ``line`` holds the partial trace."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class TurningPoint:
    location: complex
    multiplicity: int
    kind: str = "branch"  # "branch" (endpoint a_j^-/a_j^+) or "double"
    label: str = ""


@dataclass
class StokesLine:
    phase: float
    start: int
    start_angle: float
    samples: np.ndarray
    terminus: tuple  # ("point", index) | ("infinity", angle)
    max_re_G: float = 0.0
    end_G: complex = 0j

    @property
    def finite(self):
        return self.terminus[0] == "point"

    @property
    def length(self):
        return float(np.sum(np.abs(np.diff(self.samples))))


@dataclass
class StokesGraph:
    curve: SpectralCurve
    turning_points: list
    lines: list
    phases: list
    minimal_cut_flags: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    events: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)


# -- turning points -----------------------------------------------------------

def turning_points(curve):
    """Simple branch points (labelled a_j^-, a_j^+) followed by double roots."""
    out = []
    for j, c in enumerate(curve.cuts):
        out.append(TurningPoint(complex(c.a_minus), 1, "branch", f"a{j + 1}-"))
        out.append(TurningPoint(complex(c.a_plus), 1, "branch", f"a{j + 1}+"))
    for l, alpha in enumerate(curve.double_roots):
        out.append(TurningPoint(complex(alpha), 2, "double", f"alpha{l + 1}"))
    return out


def _min_pairwise(points):
    pts = [p.location if isinstance(p, TurningPoint) else p for p in points]
    if len(pts) < 2:
        return 1.0
    return min(abs(pts[i] - pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts)))


def degeneration_warnings(tps, tol=1e-10):
    msgs = []
    for i in range(len(tps)):
        for j in range(i + 1, len(tps)):
            d = abs(tps[i].location - tps[j].location)
            if tps[i].multiplicity == 1 and tps[j].multiplicity == 1 and d < 10 * tol:
                msgs.append(f"simple turning points {tps[i].label} and {tps[j].label} nearly coincide")
            elif d < 1e-6 * max(1.0, abs(tps[i].location)):
                msgs.append(f"turning points {tps[i].label} and {tps[j].label} are nearly degenerate")
    return msgs


# -- G = e^{-iφ} ∫ y dz -----------------------------------------------------------

def _near_branch(y2, z, yref):
    r = np.sqrt(np.asarray(y2(z), dtype=complex))
    return np.where(np.abs(r - yref) <= np.abs(r + yref), r, -r)


def G_eval(curve, j, z, path=None, n=400):
    """G_j(z) = e^{-i arg S_j} ∫_{a_j^-}^{z} y(z'_+) dz' along a polyline.

    ``path`` is a sequence of intermediate points (default: the straight
    segment).  The branch of y starts as the plus-side value on cut j and
    is continued along the path.
    """
    c = curve.cuts[j]
    z = complex(z)
    if z == c.a_minus:
        return 0j
    if z == c.a_plus and not path:
        return cmath.exp(-1j * cmath.phase(c.S)) * curve.cut_integral(j)
    phase = cmath.exp(-1j * cmath.phase(c.S))
    pts = [complex(c.a_minus)] + [complex(p) for p in (path or [])] + [z]
    tps = turning_points(curve)
    y2 = curve.y_squared
    for za, zb in zip(pts[:-1], pts[1:]):
        for tp in tps:
            if _point_on_segment(tp.location, za, zb) and tp.location not in (za, zb, c.a_minus):
                raise ValueError(f"path passes through turning point {tp.label}")

    # first leg: z = a^- + Δ t², y = t sqrt(Δ) q(z) with q analytic near a^-
    z0, z1 = pts[0], pts[1]
    delta = z1 - z0
    q0 = _local_factor(curve, j)
    x = (_GL_X + 1) / 2
    total = 0j
    nsub = max(8, n // 8)
    tgrid = np.linspace(0.0, 1.0, nsub + 1)
    q_prev = q0
    for a, b in zip(tgrid[:-1], tgrid[1:]):
        t = a + (b - a) * x
        zz = z0 + delta * t * t
        q = _near_branch(lambda u: y2(u) / (u - z0), zz, q_prev)
        q_prev = q[-1]
        yy = t * cmath.sqrt(delta) * q
        total += (b - a) / 2 * np.dot(_GL_W, yy * 2 * delta * t)
    y_last = cmath.sqrt(delta) * q_prev
    for za, zb in zip(pts[1:-1], pts[2:]):
        m = max(8, int(n * abs(zb - za) / max(abs(delta), 1e-300)))
        grid = np.linspace(0, 1, m + 1)
        for a, b in zip(grid[:-1], grid[1:]):
            zz = za + (zb - za) * (a + (b - a) * x)
            yy = np.empty(len(zz), dtype=complex)
            ref = y_last
            for k, zk in enumerate(zz):
                ref = complex(_near_branch(y2, zk, ref))
                yy[k] = ref
            total += (b - a) / 2 * (zb - za) * np.dot(_GL_W, yy)
            y_last = complex(_near_branch(y2, za + (zb - za) * b, ref))
    return phase * total


def _point_on_segment(p, a, b, tol=1e-12):
    d = b - a
    if d == 0:
        return abs(p - a) < tol
    t = ((p - a) / d)
    return abs(t.imag) < tol and 1e-12 < t.real < 1 - 1e-12


def _local_factor(curve, j):
    """Plus-side value of y(z)/sqrt(z - a_j^-) at a_j^- on the first leg branch.

    With y = h w and the plus side of cut j, y(a^- + δ(1+t)) for small t>0
    along the cut behaves like iδ sqrt(2 t)·(rest); the returned q satisfies
    y = sqrt(z - a^-) q with the principal sqrt of z - a^-.
    """
    c = curve.cuts[j]
    t = -1 + 1e-7
    zt = c.beta + c.delta * t
    y = complex(curve.y_plus(j, t))
    return y / cmath.sqrt(zt - c.a_minus)


# -- tracing ----------------------------------------------------------------

def emission_angles(curve, tp, phase):
    """Analytic initial directions of the Stokes lines of phase ``phase`` at ``tp``."""
    y2 = np.poly1d(_y2_coeffs(curve))
    z0 = tp.location
    e = cmath.exp(-1j * phase)
    if tp.multiplicity == 1:
        c = complex(y2.deriv(1)(z0))
        base = cmath.phase(e * cmath.sqrt(c))
        return [(2 / 3) * (math.pi / 2 + m * math.pi - base) % (2 * math.pi) for m in range(3)]
    c2 = complex(y2.deriv(2)(z0)) / 2
    base = cmath.phase(e * cmath.sqrt(c2))
    return [(1 / 2) * (math.pi / 2 + m * math.pi - base) % (2 * math.pi) for m in range(4)]


def _y2_coeffs(curve):
    dW = curve.potential.dW_coeffs
    return np.polyadd(np.polymul(dW, dW), curve.f_coeffs[::-1])


def trace_stokes_line(curve, start, direction, phase, tps=None, max_steps=20000,
                      step_factor=0.15):
    """Trace the Stokes line of the given phase leaving ``start`` at angle ``direction``.

    ``start`` is a :class:`TurningPoint` or an index into ``tps`` (default:
    :func:`turning_points` of the curve).
    """
    if tps is None:
        tps = turning_points(curve)
    if isinstance(start, TurningPoint):
        start_idx = next(i for i, t in enumerate(tps) if t.location == start.location)
    else:
        start_idx = int(start)
    tp = tps[start_idx]
    locs = np.array([t.location for t in tps])
    dmin = _min_pairwise(tps)
    capture = 1e-3 * dmin
    w_scale = abs(curve.potential.t[0]) ** 0.5 if curve.potential.n == 2 else 1.0
    escape = 10 * max(np.max(np.abs(locs)), 1e-3) + w_scale
    coeffs = _y2_coeffs(curve)
    y2 = lambda z: np.polyval(coeffs, z)
    e = cmath.exp(-1j * phase)
    z0 = tp.location
    m = tp.multiplicity

    # initial point from the local expansion, G by the substitution z = z0 + Δ t^p
    rho = 1e-2 * dmin
    delta = rho * cmath.exp(1j * direction)
    x = (_GL_X + 1) / 2
    if m == 1:
        q = complex(cmath.sqrt(complex(np.polyval(np.polyder(coeffs), z0))))
        t = x
        zz = z0 + delta * t * t
        qq = _near_branch(lambda u: y2(u) / (u - z0), zz, q)
        yy = t * cmath.sqrt(delta) * qq
        G = e * 0.5 * np.dot(_GL_W, yy * 2 * delta * t)
        y = cmath.sqrt(delta) * complex(qq[-1])
        z = z0 + delta
        y = complex(_near_branch(y2, z, y))
    else:
        c2 = complex(np.polyval(np.polyder(coeffs, 2), z0)) / 2
        q = cmath.sqrt(c2)
        zz = z0 + delta * x
        qq = _near_branch(lambda u: y2(u) / (u - z0) ** 2, zz, q)
        yy = delta * x * qq
        G = e * 0.5 * delta * np.dot(_GL_W, yy)
        z = z0 + delta
        y = complex(delta * qq[-1])
    # project the start onto Re G = 0
    for _ in range(2):
        dz = -G.real * np.conj(e * y) / abs(y) ** 2
        G += e * y * dz
        z += dz
        y = complex(_near_branch(y2, z, y))

    samples = [z0, z]
    dprev = delta / abs(delta)
    max_re = abs(G.real)
    terminus = None
    steps = 0
    while steps < max_steps:
        steps += 1
        dist = np.abs(locs - z)
        others = np.delete(dist, start_idx) if len(dist) > 1 else dist
        # capture
        if len(others) and np.min(others) < capture:
            k = int(np.argmin(np.where(np.arange(len(dist)) == start_idx, np.inf, dist)))
            samples.append(locs[k])
            terminus = ("point", k)
            break
        if abs(z) > escape:
            terminus = ("infinity", cmath.phase(z))
            break
        h = step_factor * float(np.min(dist))
        h = min(h, 0.1 * max(abs(z), escape / 10))
        while True:
            if h < 1e-14 * max(1.0, abs(z)):
                line = StokesLine(phase, start_idx, direction, np.array(samples), ("stalled", None),
                                  max_re, G)
                raise TraceStallError(f"step underflow at z = {z}", line)
            d1 = 1j * np.conj(e * y) / abs(y) * (1 / 1)
            d1 = _orient(d1 / abs(d1), dprev)
            zm = z + 0.5 * h * d1
            ym = complex(_near_branch(y2, zm, y))
            d2 = _orient(1j * np.conj(e * ym) / abs(ym), dprev)
            d2 /= abs(d2)
            zn = z + h * d2
            yn = complex(_near_branch(y2, zn, ym))
            if abs(yn - y) > 0.5 * abs(y) or abs(ym - y) > 0.5 * abs(y):
                h /= 2
                continue
            Gn = G + _segment_integral(y2, z, zn, y, yn) * e
            # projection back onto Re G = 0
            for _ in range(2):
                dz = -Gn.real * np.conj(e * yn) / abs(yn) ** 2
                znew = zn + dz
                yn = complex(_near_branch(y2, znew, yn))
                Gn = G + _segment_integral(y2, z, znew, y, yn) * e
                zn = znew
            break
        dprev = (zn - z) / abs(zn - z)
        z, y, G = zn, yn, Gn
        max_re = max(max_re, abs(G.real))
        samples.append(z)
    if terminus is None:
        line = StokesLine(phase, start_idx, direction, np.array(samples), ("stalled", None), max_re, G)
        raise TraceStallError("maximum number of steps exceeded", line)
    return StokesLine(phase, start_idx, direction, np.array(samples), terminus, max_re, G)


def _orient(d, dprev):
    return d if (d * np.conj(dprev)).real >= 0 else -d


def _segment_integral(y2, za, zb, ya, yb):
    zz = (za + zb) / 2 + (zb - za) / 2 * _GL_X
    yy = np.empty(len(zz), dtype=complex)
    for k, (zk, xk) in enumerate(zip(zz, _GL_X)):
        ref = ya + (yb - ya) * (xk + 1) / 2
        yy[k] = complex(_near_branch(y2, zk, ref))
    return (zb - za) / 2 * np.dot(_GL_W, yy)


# -- graphs ---------------------------------------------------------------------

def _distinct_phases(curve, tol=1e-12):
    out = []
    for c in curve.cuts:
        ph = cmath.phase(c.S) if c.S != 0 else 0.0
        if not any(abs(cmath.exp(1j * ph) - cmath.exp(1j * p)) < tol for p in out):
            out.append(ph)
    return out


def stokes_graph(curve, phases=None):
    """Trace the Stokes graph of ``curve``.

    Branch points of cut j emit three lines of phase arg S_j.  Double roots
    emit four lines for every distinct cut phase.
    """
    tps = turning_points(curve)
    phases_all = phases if phases is not None else _distinct_phases(curve)
    graph = StokesGraph(curve, tps, [], list(phases_all))
    graph.warnings += degeneration_warnings(tps)
    for i, tp in enumerate(tps):
        if tp.kind == "branch":
            j = i // 2
            c = curve.cuts[j]
            plist = [cmath.phase(c.S) if c.S != 0 else 0.0] if phases is None else list(phases)
        else:
            plist = list(phases_all)
        for ph in plist:
            for ang in emission_angles(curve, tp, ph):
                try:
                    graph.lines.append(trace_stokes_line(curve, i, ang, ph, tps=tps))
                except TraceStallError as exc:
                    graph.errors.append(str(exc))
                    if exc.line is not None:
                        graph.lines.append(exc.line)
    for j in range(curve.s):
        flag, wit = _minimal_cut(graph, j)
        graph.minimal_cut_flags.append(flag)
        graph.witnesses.append(wit)
    graph.events = detect_criticality(graph)
    return graph


def _minimal_cut(graph, j):
    i_minus, i_plus = 2 * j, 2 * j + 1
    c = graph.curve.cuts[j]
    ph = cmath.phase(c.S) if c.S != 0 else 0.0
    for line in graph.lines:
        if not line.finite or abs(cmath.exp(1j * line.phase) - cmath.exp(1j * ph)) > 1e-9:
            continue
        ends = {line.start, line.terminus[1]}
        if ends == {i_minus, i_plus}:
            return True, line
    return False, None


def minimal_cut_exists(graph, j):
    """(True, witness line) if a finite Stokes line joins a_j^- and a_j^+."""
    return graph.minimal_cut_flags[j], graph.witnesses[j]


def _dist_to_polyline(p, pts):
    a, b = pts[:-1], pts[1:]
    d = b - a
    dd = np.abs(d) ** 2
    with np.errstate(all="ignore"):
        t = np.where(dd > 0, ((p - a) * np.conj(d)).real / dd, 0.0)
    t = np.clip(t, 0, 1)
    return float(np.min(np.abs(a + t * d - p)))


def _segments_cross(p1, p2, q1, q2):
    def cross(u, v):
        return (np.conj(u) * v).imag
    d1 = cross(q2 - q1, p1 - q1)
    d2 = cross(q2 - q1, p2 - q1)
    d3 = cross(p2 - p1, q1 - p1)
    d4 = cross(p2 - p1, q2 - p1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def polyline_crossings(p, q, skip_ends=1):
    """Intersection points between two polylines (ignoring shared endpoints)."""
    out = []
    p = np.asarray(p)
    q = np.asarray(q)
    P1, P2 = p[:-1], p[1:]
    for k in range(len(q) - 1):
        q1, q2 = q[k], q[k + 1]
        # bounding-box prefilter
        lo = np.minimum(q1.real, q2.real), np.minimum(q1.imag, q2.imag)
        hi = np.maximum(q1.real, q2.real), np.maximum(q1.imag, q2.imag)
        mask = ((np.maximum(P1.real, P2.real) >= lo[0]) & (np.minimum(P1.real, P2.real) <= hi[0])
                & (np.maximum(P1.imag, P2.imag) >= lo[1]) & (np.minimum(P1.imag, P2.imag) <= hi[1]))
        for i in np.nonzero(mask)[0]:
            if _segments_cross(P1[i], P2[i], q1, q2):
                a, d = P1[i], P2[i] - P1[i]
                b, e = q1, q2 - q1
                t = ((np.conj(e) * (b - a)).imag) / ((np.conj(e) * d).imag)
                out.append(complex(a + t * d))
    return out


def detect_criticality(graph, finite_only=False):
    """Criticality events of a Stokes graph.

    * ``zero-on-cut``: a double root lies on a finite line joining the two
      endpoints of a cut (distance < 1e-3 of the line length).
    * ``finite-line-to-zero``: a finite line joins a branch point to a double root.
    * ``line-crossing``: lines of different phases cross; with
      ``finite_only`` only finite lines are compared (by default every
      traced line takes part).
    """
    events = []
    tps = graph.turning_points
    for j in range(graph.curve.s):
        flag, wit = graph.minimal_cut_flags[j], graph.witnesses[j]
        if not flag:
            continue
        for k, tp in enumerate(tps):
            if tp.multiplicity != 2:
                continue
            if _dist_to_polyline(tp.location, wit.samples) < 1e-3 * wit.length:
                events.append({"type": "zero-on-cut", "cut": j, "point": k, "location": tp.location})
    # a cut that runs through a double root is traced as two finite lines
    # meeting at that root
    for j in range(graph.curve.s):
        for k, tp in enumerate(tps):
            if tp.multiplicity != 2:
                continue
            joined = {e for line in graph.lines if line.finite
                      for e in (line.start, line.terminus[1]) if k in (line.start, line.terminus[1])}
            if {2 * j, 2 * j + 1} <= joined and not graph.minimal_cut_flags[j]:
                events.append({"type": "zero-on-cut", "cut": j, "point": k, "location": tp.location})
    for line in graph.lines:
        if not line.finite:
            continue
        a, b = tps[line.start], tps[line.terminus[1]]
        if {a.kind, b.kind} == {"branch", "double"}:
            events.append({"type": "finite-line-to-zero", "line": (line.start, line.terminus[1]),
                           "location": (b if b.kind == "double" else a).location})
    lines = [l for l in graph.lines if l.finite or not finite_only]
    seen = set()
    for i in range(len(lines)):
        for k in range(i + 1, len(lines)):
            li, lk = lines[i], lines[k]
            if abs(cmath.exp(1j * li.phase) - cmath.exp(1j * lk.phase)) < 1e-9:
                continue
            for pt in polyline_crossings(li.samples, lk.samples):
                key = (round(pt.real, 6), round(pt.imag, 6))
                if any(abs(pt - tp.location) < 1e-3 * _min_pairwise(tps) for tp in tps) or key in seen:
                    continue
                seen.add(key)
                events.append({"type": "line-crossing", "location": pt,
                               "lines": (li.start, lk.start)})
    return events


def finite_lines(graph):
    return [l for l in graph.lines if l.finite]
