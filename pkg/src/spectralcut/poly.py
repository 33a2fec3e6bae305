"""Polynomial potentials and the square-root factor ``w(z)`` of a spectral curve.

Polynomials are numpy coefficient arrays, highest degree first (the
``np.polyval`` convention).  The potential is

    W(z) = z^(n+1)/(n+1) + t_n z^n + ... + t_1 z,

so ``W'`` is monic of degree n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROOT_RTOL = 1e-12


class DegeneratePointError(ValueError):
    """One-sided evaluation requested exactly at a branch point."""


def poly_roots(coeffs):
    """All roots of a polynomial (highest-first coefficients).

    Companion-matrix roots are polished with a few Newton steps; the
    contract is ``|p(root)| <= 1e-12 * max|coeff|`` for simple roots.
    """
    c = np.trim_zeros(np.atleast_1d(np.asarray(coeffs, dtype=complex)), "f")
    if c.size == 0:
        raise ValueError("the zero polynomial has no well-defined roots")
    if c.size == 1:
        raise ValueError("constant polynomial has no roots")
    roots = np.roots(c).astype(complex)
    dc = np.polyder(c)
    for _ in range(3):
        d = np.polyval(dc, roots)
        ok = np.abs(d) > 1e-300
        step = np.zeros_like(roots)
        step[ok] = np.polyval(c, roots[ok]) / d[ok]
        # a polishing step larger than the root spacing means a multiple root
        roots = np.where(np.abs(step) < 1e-3 * (1 + np.abs(roots)), roots - step, roots)
    return sorted(roots.tolist(), key=lambda r: (round(r.real, 12), r.imag))


@dataclass(frozen=True)
class Potential:
    """Tree-level potential with monic ``W'`` of degree ``n``.

    ``t`` holds (t_1, ..., t_n).
    """

    t: tuple
    dW_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    W_coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    critical_points: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = tuple(complex(x) for x in self.t)
        object.__setattr__(self, "t", t)
        n = len(t)
        if n < 1:
            raise ValueError("need at least one coefficient t_1")
        W = np.zeros(n + 2, dtype=complex)
        W[0] = 1.0 / (n + 1)
        for k, tk in enumerate(t, start=1):
            W[n + 1 - k] = tk
        object.__setattr__(self, "W_coeffs", W)
        object.__setattr__(self, "dW_coeffs", np.polyder(W))
        object.__setattr__(self, "critical_points", tuple(poly_roots(self.dW_coeffs)))

    @classmethod
    def gaussian(cls):
        """W(z) = z^2/2."""
        return cls((0.0,))

    @classmethod
    def cubic(cls, w):
        """W(z) = z^3/3 - w z."""
        return cls((-complex(w), 0.0))

    @property
    def n(self):
        return len(self.t)

    def W(self, z):
        return np.polyval(self.W_coeffs, z)

    def dW(self, z):
        return np.polyval(self.dW_coeffs, z)

    def d2W(self, z):
        return np.polyval(np.polyder(self.dW_coeffs), z)


def eval_potential(p, z):
    """W(z) for potential ``p``."""
    return p.W(z)


def _pair_sqrt(z, beta, delta):
    # sqrt((z-a)(z-b)) with its cut on the straight segment [a, b], ~ z at infinity
    v = (z - beta) / delta
    # a signed zero imaginary part would send v - 1 and v + 1 to opposite
    # sides of the principal cut on the extension of the segment
    v = np.where(v.imag == 0, v.real + 0j, v)
    return delta * np.sqrt(v - 1) * np.sqrt(v + 1)


@dataclass(frozen=True)
class BranchSqrt:
    """w(z) = sqrt(prod (z - a_m^-)(z - a_m^+)), normalised by w ~ z^s.

    Each pair contributes a factor with its cut on the straight segment
    a_m^- -> a_m^+; the "plus" side of a cut is the left side of that
    oriented segment.
    """

    branch_points: tuple

    def __post_init__(self):
        pts = tuple(complex(x) for x in self.branch_points)
        if len(pts) % 2:
            raise ValueError("branch points come in pairs")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if pts[i] == pts[j]:
                    raise ValueError("branch points must be pairwise distinct")
        object.__setattr__(self, "branch_points", pts)

    @property
    def s(self):
        return len(self.branch_points) // 2

    @property
    def pairs(self):
        bp = self.branch_points
        return [(bp[2 * m], bp[2 * m + 1]) for m in range(self.s)]

    def pair_factor(self, m, z):
        a, b = self.pairs[m]
        return _pair_sqrt(np.asarray(z, dtype=complex), (a + b) / 2, (b - a) / 2)

    def __call__(self, z, skip=None):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for m, (a, b) in enumerate(self.pairs):
            if m != skip:
                out = out * _pair_sqrt(z, (a + b) / 2, (b - a) / 2)
        return out

    def on_cut(self, m, t, side="plus"):
        """w at ``z = beta_m + delta_m t`` (t in [-1, 1]) on the given side of cut m."""
        a, b = self.pairs[m]
        beta, delta = (a + b) / 2, (b - a) / 2
        t = np.asarray(t, dtype=float)
        sign = 1.0 if side == "plus" else -1.0
        own = sign * 1j * delta * np.sqrt(np.clip(1 - t * t, 0, None))
        return own * self(beta + delta * t, skip=m)

    def locate(self, z, tol=1e-12):
        """(cut index, t) if ``z`` lies on a cut segment, else None."""
        for m, (a, b) in enumerate(self.pairs):
            beta, delta = (a + b) / 2, (b - a) / 2
            v = (z - beta) / delta
            if abs(v.imag) <= tol * max(1.0, abs(v)) and -1 <= v.real <= 1:
                return m, v.real
        return None


def eval_w(b, z, side="off-cut"):
    """Branch-consistent value of w(z).

    ``side`` is "off-cut", "plus" or "minus"; one-sided values satisfy
    w(z+) = -w(z-).
    """
    z = complex(z)
    if side == "off-cut":
        if z in b.branch_points:
            raise DegeneratePointError(f"w is evaluated at branch point {z}")
        return complex(b(z))
    if z in b.branch_points:
        raise DegeneratePointError(f"one-sided value requested at branch point {z}")
    loc = b.locate(z)
    if loc is None:
        raise ValueError(f"{z} does not lie on a cut")
    m, t = loc
    return complex(b.on_cut(m, t, side))


def inverse_sqrt_series(branch_points, order):
    """Coefficients r_k of prod(1 - a u)^(-1/2) = sum r_k u^k, k = 0..order.

    Uses the exact recurrence from q r' = -q' r / 2 with q = prod(1 - a u).
    """
    q = np.array([1.0 + 0j])
    for a in branch_points:
        q = np.convolve(q, [1.0, -a])
    r = np.zeros(order + 1, dtype=complex)
    r[0] = 1.0
    deg = len(q) - 1
    for m in range(order):
        acc = 0j
        for k in range(1, min(m + 1, deg) + 1):
            acc -= q[k] * (m - k + 1) * r[m - k + 1]
        for k in range(0, min(m, deg - 1) + 1):
            acc -= 0.5 * (k + 1) * q[k + 1] * r[m - k]
        r[m + 1] = acc / (m + 1)
    return r


def positive_part_quotient(p, b):
    """h(z) = (W'(z)/w(z))_+ as highest-first coefficients (degree n - s)."""
    n, s = p.n, b.s
    if n < s:
        raise ValueError("need deg W' >= number of cuts")
    c = p.dW_coeffs[::-1]  # ascending
    r = inverse_sqrt_series(b.branch_points, n - s)
    h = np.zeros(n - s + 1, dtype=complex)
    for power in range(n - s + 1):
        h[power] = sum(c[power + s + k] * r[k] for k in range(n - s - power + 1))
    return h[::-1]
