"""Spectral curves y = h(z) w(z) and solvers for their branch points.

Cuts are represented by the straight segments between their endpoints.
Every quantity computed here (periods, cut integrals) depends only on the
homology class of the cuts, so a straight segment stands in for the curved
minimal cut as long as the two are homotopic in the plane punctured at
the branch points.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .poly import BranchSqrt, Potential, poly_roots, positive_part_quotient
from .quad import QuadratureError, cheb1_integral, cheb2_integral

log = logging.getLogger(__name__)

TWO_PI_I = 2j * math.pi


@lru_cache(maxsize=16)
def _unit_legendre(n):
    x, wts = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, wts / 2


class SolverError(RuntimeError):
    """Newton iteration failed; ``last`` carries the final iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class DegenerationError(SolverError):
    """Two endpoints collided during iteration."""


class ContinuationError(RuntimeError):
    """Continuation stalled; ``trajectory`` holds the curves obtained so far."""

    def __init__(self, message, trajectory, failed_at):
        super().__init__(message)
        self.trajectory = trajectory
        self.failed_at = failed_at


class InconsistentBranchError(ValueError):
    pass


@dataclass(frozen=True)
class CutSpec:
    a_minus: complex
    a_plus: complex
    S: complex

    @property
    def beta(self):
        return (self.a_plus + self.a_minus) / 2

    @property
    def delta(self):
        return (self.a_plus - self.a_minus) / 2


@dataclass(frozen=True)
class SpectralCurve:
    """An s-cut spectral curve y^2 = W'(z)^2 + f(z)."""

    potential: Potential
    cuts: tuple
    branch: BranchSqrt = field(init=False, repr=False, compare=False)
    h_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    double_roots: tuple = field(init=False, repr=False, compare=False)
    f_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    high_coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cuts = tuple(self.cuts)
        object.__setattr__(self, "cuts", cuts)
        pts = []
        for c in cuts:
            pts += [c.a_minus, c.a_plus]
        b = BranchSqrt(tuple(pts))
        h = positive_part_quotient(self.potential, b)
        object.__setattr__(self, "branch", b)
        object.__setattr__(self, "h_coeffs", h)
        roots = tuple(poly_roots(h)) if len(h) > 1 else ()
        object.__setattr__(self, "double_roots", roots)
        prod = np.array([1.0 + 0j])
        for p in pts:
            prod = np.convolve(prod, [1.0, -p])
        diff = np.polysub(np.polymul(np.polymul(h, h), prod),
                          np.polymul(self.potential.dW_coeffs, self.potential.dW_coeffs))
        n, s = self.potential.n, self.s
        asc = np.zeros(2 * n + 1, dtype=complex)
        d = diff[::-1]
        asc[: len(d)] = d
        object.__setattr__(self, "f_coeffs", asc[:n].copy())
        object.__setattr__(self, "high_coeffs", asc[n:n + s].copy())

    @classmethod
    def from_endpoints(cls, potential, endpoints, S):
        """Build from a flat endpoint list (a_1^-, a_1^+, ...) and the S_j."""
        endpoints = [complex(x) for x in endpoints]
        S = [complex(x) for x in np.atleast_1d(S)]
        cuts = [CutSpec(endpoints[2 * j], endpoints[2 * j + 1], S[j]) for j in range(len(S))]
        return cls(potential, tuple(cuts))

    @property
    def s(self):
        return len(self.cuts)

    @property
    def total_S(self):
        return sum(c.S for c in self.cuts)

    @property
    def endpoints(self):
        return self.branch.branch_points

    @property
    def turning_points(self):
        return list(self.endpoints) + list(self.double_roots)

    def h(self, z):
        return np.polyval(self.h_coeffs, z)

    def y(self, z):
        """First-sheet y(z) off the cuts (y ~ W' at infinity)."""
        z = np.asarray(z, dtype=complex)
        return self.h(z) * self.branch(z)

    def y_squared(self, z):
        return self.potential.dW(z) ** 2 + np.polyval(self.f_coeffs[::-1], z)

    def W_minus_y(self, z):
        """W'(z) - y(z), evaluated without cancellation for large |z|."""
        z = np.asarray(z, dtype=complex)
        dW = self.potential.dW(z)
        y = self.y(z)
        f = np.polyval(self.f_coeffs[::-1], z)
        big = np.abs(z) > 2 * self.scale
        out = dW - y
        with np.errstate(all="ignore"):
            stable = -f / (dW + y)
        return np.where(big, stable, out)

    @property
    def scale(self):
        return max(1.0, max(abs(p) for p in self.turning_points))

    def cut_point(self, j, t):
        c = self.cuts[j]
        return c.beta + c.delta * np.asarray(t)

    def y_plus(self, j, t):
        """y on the plus side of cut j at z = beta_j + delta_j t."""
        z = self.cut_point(j, t)
        return self.h(z) * self.branch.on_cut(j, t, "plus")

    # -- integrals ----------------------------------------------------------

    def cut_integral(self, j, func=None, rtol=1e-12):
        """∫ along cut j (a_j^- -> a_j^+) of func(z) y(z_+) dz."""
        c = self.cuts[j]
        delta = c.delta

        def g(t):
            z = c.beta + delta * t
            val = self.h(z) * self.branch(z, skip=j)
            if func is not None:
                val = val * func(z)
            return val

        return 1j * delta * delta * cheb2_integral(g, rtol=rtol, atol=1e-15 * self.scale ** 4)

    def cut_integral_over_w(self, j, poly, rtol=1e-12):
        """∫ along cut j of poly(z) / w(z_+) dz."""
        c = self.cuts[j]

        def g(t):
            z = c.beta + c.delta * t
            return np.polyval(poly, z) / self.branch(z, skip=j)

        return -1j * cheb1_integral(g, rtol=rtol, atol=1e-300)

    def a_period_over_w(self, j, poly):
        """Counter-clockwise A_j period of poly(z)/w(z) dz."""
        return -2 * self.cut_integral_over_w(j, poly)

    def bridge_integral(self, z0, z1, kind="y", poly=None, rtol=1e-12):
        """∫ from branch point z0 to branch point z1 along the segment of y dz
        (kind="y") or of poly/w dz (kind="w")."""
        half = (z1 - z0) / 2
        mid = (z1 + z0) / 2

        if kind == "y":
            def g(t):
                z = mid + half * t
                return self.y(z) / np.sqrt(1 - t * t)
            return half * cheb2_integral(g, rtol=rtol, atol=1e-15 * self.scale ** 4)

        def g1(t):
            z = mid + half * t
            return np.polyval(poly, z) / self.branch(z) * np.sqrt(1 - t * t)
        return half * cheb1_integral(g1, rtol=rtol, atol=1e-300)

    def ray_integral(self, z0, direction, func, kappa, n0=64, rtol=1e-11, nmax=1 << 12):
        """∫_0^∞ func(z0 + r e^{iχ}, r) e^{iχ} dr via r = κ x²/(1-x²), Gauss-Legendre in x."""
        e = cmath.exp(1j * direction)

        def integrand(n):
            x, wts = _unit_legendre(n)
            r = kappa * x * x / (1 - x * x)
            drdx = kappa * 2 * x / (1 - x * x) ** 2
            return np.dot(wts, func(z0 + r * e, r) * drdx) * e

        prev = integrand(n0)
        n = 2 * n0
        while n <= nmax:
            cur = integrand(n)
            if abs(cur - prev) <= rtol * max(abs(cur), 1.0):
                return cur
            prev, n = cur, 2 * n
        raise QuadratureError("ray integral did not converge", estimate=cur, error=abs(cur - prev))

    @property
    def gamma_direction(self):
        """Direction χ of the outgoing ray from the last endpoint (principal arg).

        The semi-infinite path carrying the logarithm branch cuts comes in
        from infinity along the ray a_1^- + r (a_1^- - a_s^+), runs through
        every cut and bridge in order, and ends at a_s^+.
        """
        return cmath.phase(self.cuts[-1].a_plus - self.cuts[0].a_minus)


def period_integral(curve, j):
    """-(1/4πi) ∮_{A_j} y dz, which equals S_j on a consistent curve."""
    return curve.cut_integral(j) / TWO_PI_I


def endpoint_residual(curve):
    """Residual vector of length n + 2s.

    Entries: the s coefficients of y^2 - W'^2 at powers n..n+s-1, the
    relation b_{n-1} + 4S, the n-1 lower coefficients of f compared with
    their stored values (identically zero for curves built from endpoints),
    and the s period residuals S_j(computed) - S_j.
    """
    n, s = curve.potential.n, curve.s
    res = list(curve.high_coeffs)
    res.append(curve.f_coeffs[n - 1] + 4 * curve.total_S)
    res += [0j] * (n - 1)
    for j, c in enumerate(curve.cuts):
        res.append(period_integral(curve, j) - c.S)
    return np.array(res, dtype=complex)


# -- cubic model, one cut ---------------------------------------------------

def _sqrt_nonneg_imag(x):
    r = cmath.sqrt(x)
    return -r if r.imag < 0 else r


def cubic_beta(w, S, k):
    """Branch k of the root of β^3 - w β + S = 0.

    β_k = -w/(3Δ_k) - Δ_k with Δ_k = e^{2πik/3} (S/2 + sqrt(S²/4 - (w/3)³))^{1/3},
    principal cube root, square root with nonnegative imaginary part.
    """
    w, S = complex(w), complex(S)
    disc = _sqrt_nonneg_imag(S * S / 4 - (w / 3) ** 3)
    base = S / 2 + disc
    if base == 0:
        raise InconsistentBranchError("Δ_k vanishes; the branch labelling needs w != 0")
    delta_k = cmath.exp(2j * math.pi * k / 3) * base ** (1 / 3)
    return -w / (3 * delta_k) - delta_k


def branch_points_S(w):
    """The two values S_± = ±2 (w/3)^{3/2} where two β branches coalesce."""
    w = complex(w)
    if w == 0:
        raise ValueError("w must be nonzero")
    v = 2 * (w / 3) ** 1.5
    return v, -v


def solve_one_cut_cubic(w, S, k):
    """Endpoints of the one-cut curve of W = z³/3 - w z on branch k."""
    w, S = complex(w), complex(S)
    beta = cubic_beta(w, S, k)
    if abs(beta) < 1e-14 * max(1.0, abs(w)) ** 0.5:
        if abs(S) > 1e-14 * max(1.0, abs(w)) ** 1.5:
            raise InconsistentBranchError(f"β_{k} = 0 requires S = 0, got S = {S}")
        delta = cmath.sqrt(2 * w)
        beta = 0j
    else:
        delta = cmath.sqrt(2 * S / beta)
    return CutSpec(beta - delta, beta + delta, S)


def one_cut_cubic_curve(w, S, k):
    return SpectralCurve(Potential.cubic(w), (solve_one_cut_cubic(w, S, k),))


def one_cut_cubic_from_beta(w, beta):
    """One-cut curve of the cubic model labelled directly by β (S = wβ - β³)."""
    w, beta = complex(w), complex(beta)
    S = w * beta - beta ** 3
    delta = cmath.sqrt(2 * (w - beta * beta))
    return SpectralCurve(Potential.cubic(w), (CutSpec(beta - delta, beta + delta, S),))


def classical_endpoints(p, S, points=None):
    """Leading classical-limit cuts: β_j ≈ a_j, δ_j² ≈ 4 S_j / W''(a_j).

    ``points`` selects which critical points open up (default: the first s).
    """
    S = [complex(x) for x in np.atleast_1d(S)]
    pts = list(points) if points is not None else list(p.critical_points[: len(S)])
    cuts = []
    for Sj, aj in zip(S, pts):
        d2 = p.d2W(aj)
        if abs(d2) < 1e-12:
            raise ValueError(f"degenerate critical point {aj}: W'' = 0")
        delta = cmath.sqrt(4 * Sj / d2)
        cuts.append(CutSpec(aj - delta, aj + delta, Sj))
    return cuts


# -- cubic model, two cuts ----------------------------------------------------

def two_cut_system(w, S1, S2, x):
    """Residuals of the endpoint equations for (a, b, c, d) = x."""
    a, b, c, d = x
    e1 = a + b + c + d
    e2 = a * b + a * c + a * d + b * c + b * d + c * d
    e3 = a * b * c + a * b * d + a * c * d + b * c * d
    curve = SpectralCurve.from_endpoints(Potential.cubic(w), x, [S1, S2])
    I = curve.cut_integral(0)
    return np.array([e1, e2 + 2 * w, e3 - 4 * (S1 + S2), I - TWO_PI_I * S1])


def _min_separation(x):
    return min(abs(x[i] - x[j]) for i in range(len(x)) for j in range(i + 1, len(x)))


def newton_complex(fun, x0, scale, tol=1e-12, maxiter=40, fd_step=1e-6):
    """Damped Newton for a square holomorphic system with a central-difference Jacobian."""
    x = np.array(x0, dtype=complex)
    h = fd_step * scale
    r = fun(x)
    nr = np.max(np.abs(r))
    for it in range(maxiter):
        if nr < tol * scale ** 3:
            return x, nr
        J = np.empty((len(r), len(x)), dtype=complex)
        for k in range(len(x)):
            e = np.zeros(len(x), dtype=complex)
            e[k] = h
            J[:, k] = (fun(x + e) - fun(x - e)) / (2 * h)
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Jacobian", last=x) from exc
        lam = 1.0
        for _ in range(8):
            xn = x + lam * dx
            if _min_separation(xn) < 1e-9 * scale:
                lam /= 2
                continue
            try:
                rn = fun(xn)
            except QuadratureError:
                lam /= 2
                continue
            nrn = np.max(np.abs(rn))
            if nrn < nr or nrn < tol * scale ** 3:
                break
            lam /= 2
        else:
            if _min_separation(x + dx) < 1e-9 * scale:
                raise DegenerationError("endpoints collided during Newton iteration", last=x)
            raise SolverError(f"Newton stalled at residual {nr:.3e}", last=x)
        x, r, nr = xn, rn, nrn
        if np.max(np.abs(lam * dx)) < 1e-15 * scale and nr < 1e-9 * scale ** 3:
            return x, nr
    if nr < 1e-10 * scale ** 3:
        return x, nr
    raise SolverError(f"Newton did not converge (residual {nr:.3e})", last=x)


def solve_two_cut_cubic(w, S1, S2, guess, tol=1e-12):
    """Two-cut curve of the cubic model from an initial endpoint guess (a, b, c, d)."""
    w, S1, S2 = complex(w), complex(S1), complex(S2)
    scale = max(1.0, abs(w) ** 0.5)
    x, _ = newton_complex(lambda x: two_cut_system(w, S1, S2, x), guess, scale, tol=tol)
    if _min_separation(x) < 10 * math.sqrt(tol) * scale:
        # a vanishing cut solves the system only to the square root of the tolerance
        raise DegenerationError("two endpoints coincide in the solution", last=x)
    return SpectralCurve.from_endpoints(Potential.cubic(w), x, [S1, S2])


def linear_path(p0, p1, max_step):
    """Points from p0 to p1 (pairs of complex numbers) with |ΔS_i| <= max_step."""
    p0 = np.asarray(p0, dtype=complex)
    p1 = np.asarray(p1, dtype=complex)
    n = max(1, int(math.ceil(np.max(np.abs(p1 - p0)) / max_step)))
    return [tuple(p0 + (p1 - p0) * k / n) for k in range(n + 1)]


def continue_two_cut(w, path, start, max_halvings=20):
    """Track a two-cut curve along sampled (S1, S2) points, starting from ``start``.

    Each sample is solved with the previous endpoints as initial guess.  A
    step that fails is bisected, up to ``max_halvings`` levels, before a
    :class:`ContinuationError` carrying the partial trajectory is raised.
    """
    w = complex(w)
    path = [np.array([complex(v) for v in p]) for p in path]
    out = [start]
    x = np.array(start.endpoints)
    for k in range(1, len(path)):
        lo, target = path[k - 1], path[k]
        frac = 1.0
        depth = 0
        reached = lo
        while True:
            mid = reached + (target - reached) * min(frac, 1.0)
            try:
                c = solve_two_cut_cubic(w, mid[0], mid[1], x)
            except (SolverError, QuadratureError):
                depth += 1
                frac /= 2
                if depth > max_halvings:
                    raise ContinuationError(
                        f"continuation failed between S = {tuple(reached)} and {tuple(mid)}",
                        out, tuple(mid))
                continue
            x = np.array(c.endpoints)
            if np.array_equal(mid, target) or frac >= 1.0:
                out.append(c)
                break
            reached = mid
            frac = min(1.0, 2 * frac)
    return out


def puiseux_coefficients(S1, S2):
    """The first six Puiseux coefficients a_k, c_k (unit w)."""
    S1, S2 = complex(S1), complex(S2)
    r1, r2 = cmath.sqrt(2 * S1), cmath.sqrt(2 * S2)
    a = [
        1j * r1,
        (-S1 + S2) / 2,
        -1j * r1 / 8 * (2 * S1 - 3 * S2),
        (3 * S1 ** 2 - 8 * S1 * S2 + 3 * S2 ** 2) / 8,
        1j * r1 / 128 * (36 * S1 ** 2 - 122 * S1 * S2 + 69 * S2 ** 2),
        -(S1 - S2) * (16 * S1 ** 2 - 59 * S1 * S2 + 16 * S2 ** 2) / 32,
    ]
    c = [
        -r2,
        (S1 - S2) / 2,
        r2 / 8 * (3 * S1 - 2 * S2),
        -(3 * S1 ** 2 - 8 * S1 * S2 + 3 * S2 ** 2) / 8,
        -r2 / 128 * (69 * S1 ** 2 - 122 * S1 * S2 + 36 * S2 ** 2),
        (S1 - S2) * (16 * S1 ** 2 - 59 * S1 * S2 + 16 * S2 ** 2) / 32,
    ]
    return a, c


def puiseux_two_cut(w, S1, S2, order=6):
    """Truncated Puiseux endpoints (a, b, c, d) of the classical two-cut branch."""
    if not 1 <= order <= 6:
        raise ValueError("order must be between 1 and 6")
    w = complex(w)
    w32 = w ** 1.5
    s1, s2 = complex(S1) / w32, complex(S2) / w32
    if max(abs(s1), abs(s2)) > 0.1:
        warnings.warn("Puiseux series used outside its small-S regime", RuntimeWarning)
    ak, ck = puiseux_coefficients(s1, s2)
    a = -1 + sum(ak[j] for j in range(order))
    b = -1 + sum((-1) ** (j + 1) * ak[j] for j in range(order))
    c = 1 + sum(ck[j] for j in range(order))
    d = 1 + sum((-1) ** (j + 1) * ck[j] for j in range(order))
    rw = cmath.sqrt(w)
    return tuple(rw * v for v in (a, b, c, d))


def sw_slice_endpoints(w, mod_a):
    """Endpoints (a, b, -b, -a) of the Seiberg-Witten slice family at |a| = ``mod_a``.

    a = |a| e^{i arg w/2}, b = |b| e^{i arg w/2} with |b| = sqrt(2|w| - |a|²),
    valid on the closed interval sqrt|w| <= |a| <= sqrt(2|w|).
    """
    w = complex(w)
    mw = abs(w)
    lo, hi = math.sqrt(mw), math.sqrt(2 * mw)
    if not (lo - 1e-12 <= mod_a <= hi + 1e-12):
        raise ValueError(f"|a| = {mod_a} outside [{lo}, {hi}]")
    mod_a = min(max(mod_a, lo), hi)
    ph = cmath.exp(1j * cmath.phase(w) / 2)
    mod_b = math.sqrt(max(2 * mw - mod_a ** 2, 0.0))
    a, b = mod_a * ph, mod_b * ph
    return a, b, -b, -a


def sw_slice_solve(w, mod_a):
    """Symmetric two-cut curve on the slice S1 + S2 = 0.

    Returns (S1, curve) with the endpoints of :func:`sw_slice_endpoints`,
    arg S1 = (3/2) arg w and |S1| from a real integral.  At |a| = sqrt(2|w|)
    the cuts merge and the one-cut curve with S = 0 is returned; at
    |a| = sqrt|w| both cuts shrink to points (S1 = 0) and no curve exists,
    so ``curve`` is None.
    """
    w = complex(w)
    a, b, _, _ = sw_slice_endpoints(w, mod_a)
    mod_a, mod_b = abs(a), abs(b)
    if mod_b < 1e-12:
        return 0j, SpectralCurve(Potential.cubic(w), (CutSpec(-a, a, 0j),))
    if abs(mod_a - mod_b) < 1e-14 * mod_a:
        return 0j, None
    from .quad import complex_quad
    val, _ = complex_quad(lambda x: np.sqrt(complex((mod_a ** 2 - x * x) * (x * x - mod_b ** 2))),
                          mod_b, mod_a)
    S1 = val.real / (2 * math.pi) * cmath.exp(1.5j * cmath.phase(w))
    curve = SpectralCurve.from_endpoints(Potential.cubic(w), [a, b, -b, -a], [S1, -S1])
    return S1, curve
