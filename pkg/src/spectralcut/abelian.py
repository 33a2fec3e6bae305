"""Normalized Abelian differentials on a hyperelliptic spectral curve.

For an s-cut curve with w(z) ~ z^s the holomorphic differentials are
p(z)/w(z) dz with deg p <= s - 2, normalized on the first s - 1 A-cycles,
and the third-kind differential dΩ₀ = P₀(z)/w(z) dz has monic P₀ of degree
s - 1 and vanishing first s - 1 A-periods.  Its only poles are at the two
points at infinity, with residues ∓1.

The prepotential Hessian follows from

    ∂(y dz)/∂S_j = -4πi (1 - δ_js) dφ_j - 2 dΩ₀,

integrated against the same contours that define the constants L_i.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .curve import SpectralCurve

FOUR_PI_I = 4j * math.pi


@dataclass
class DifferentialBasis:
    p_polys: list  # highest-first coefficient arrays, one per holomorphic differential
    P0: np.ndarray
    condition: float = 1.0


def _period_matrix(curve, degree):
    """M[i, m] = ∮_{A_i} z^m / w dz for i < s - 1, m <= degree."""
    s = curve.s
    M = np.zeros((s - 1, degree + 1), dtype=complex)
    for i in range(s - 1):
        for m in range(degree + 1):
            mono = np.zeros(m + 1)
            mono[0] = 1.0
            M[i, m] = curve.a_period_over_w(i, mono)
    return M


def holomorphic_basis(curve):
    """Coefficients of p_j with ∮_{A_i} p_j/w dz = δ_ij (i, j < s)."""
    s = curve.s
    if s < 2:
        return DifferentialBasis([], np.array([1.0 + 0j]), 1.0)
    M = _period_matrix(curve, s - 2)  # (s-1) x (s-1), columns are powers 0..s-2
    cond = float(np.linalg.cond(M))
    if cond > 1e10:
        warnings.warn(f"A-period matrix is ill-conditioned (cond = {cond:.2e})", RuntimeWarning)
    coeffs = np.linalg.solve(M, np.eye(s - 1, dtype=complex))  # column j -> p_j ascending
    polys = [coeffs[:, j][::-1].copy() for j in range(s - 1)]
    return DifferentialBasis(polys, omega0(curve).P0, cond)


def omega0(curve):
    """Monic P₀ of degree s - 1 with vanishing A_1..A_{s-1} periods of P₀/w dz."""
    s = curve.s
    if s == 1:
        return DifferentialBasis([], np.array([1.0 + 0j]), 1.0)
    M = _period_matrix(curve, s - 1)
    lower, lead = M[:, : s - 1], M[:, s - 1]
    cond = float(np.linalg.cond(lower))
    c = np.linalg.solve(lower, -lead)
    P0 = np.concatenate([[1.0 + 0j], c[::-1]])
    return DifferentialBasis([], P0, cond)


def abelian_integrals(curve, basis, target, direction=None, kappa=None):
    """(φ_j(target), Ω₀(target)) with integrals taken in from infinity along a ray.

    φ_j(u) = ∫_{∞}^{u} dφ_j and Ω₀(u) = lim (∫_{u₀}^{u} dΩ₀ + log u₀), with
    the ray leaving ``target`` at angle ``direction`` (default: the
    outgoing direction of the logarithm cut construction).
    """
    target = complex(target)
    chi = curve.gamma_direction if direction is None else direction
    kappa = kappa or max(abs(curve.cuts[-1].delta), 1e-3)
    e = cmath.exp(1j * chi)
    phis = []
    for p in basis.p_polys:
        val = curve.ray_integral(target, chi, lambda z, r, p=p: np.polyval(p, z) / curve.branch(z), kappa)
        phis.append(-val)

    def om(z, r):
        return np.polyval(basis.P0, z) / curve.branch(z) - 1.0 / ((r + kappa) * e)

    omega = math.log(kappa) + 1j * chi - curve.ray_integral(target, chi, om, kappa)
    return np.array(phis, dtype=complex), complex(omega)


def _bridge_terms(curve, basis, i):
    """∫ over the bridges from cut i to the last cut of (dφ_j, dΩ₀)."""
    s = curve.s
    phi = np.zeros(len(basis.p_polys), dtype=complex)
    om = 0j
    for m in range(i, s - 1):
        z0, z1 = curve.cuts[m].a_plus, curve.cuts[m + 1].a_minus
        for j, p in enumerate(basis.p_polys):
            phi[j] += curve.bridge_integral(z0, z1, kind="w", poly=p)
        om += curve.bridge_integral(z0, z1, kind="w", poly=basis.P0)
    return phi, om


def d2F_matrix(curve, basis=None):
    """Second derivatives ∂²F/∂S_i∂S_j of the prepotential."""
    s = curve.s
    if s == 1:
        c = curve.cuts[0]
        return np.array([[-cmath.log(((c.a_plus - c.a_minus) / 4) ** 2)]])
    basis = basis or holomorphic_basis(curve)
    phis, om = abelian_integrals(curve, basis, curve.cuts[-1].a_plus)
    H = np.zeros((s, s), dtype=complex)
    for j in range(s):
        coef = FOUR_PI_I if j < s - 1 else 0.0
        H[s - 1, j] = -(coef * (phis[j] if j < s - 1 else 0.0) + 2 * om)
    for i in range(s - 1):
        bphi, bom = _bridge_terms(curve, basis, i)
        for j in range(s):
            coef = FOUR_PI_I if j < s - 1 else 0.0
            H[i, j] = H[s - 1, j] + coef * (bphi[j] if j < s - 1 else 0.0) + 2 * bom
    return H


def d2F_matrix_at_split(one_cut, alpha, kappa=None):
    """Hessian of the two-cut sector in the limit where cut [a, b] splits at ``alpha``.

    In the limit the holomorphic differential vanishes and
    P₀^{(2)}(z) = (z - α) P₀^{(1)}(z), so dΩ₀ reduces to the one-cut
    differential and the bridge shrinks to a point.
    """
    c = one_cut.cuts[0]
    chi = cmath.phase(c.a_plus - c.a_minus)
    basis = DifferentialBasis([], np.array([1.0 + 0j]))
    _, om = abelian_integrals(one_cut, basis, c.a_plus, direction=chi, kappa=kappa)
    val = -2 * om
    return np.full((2, 2), val, dtype=complex)


def _segments_cross(p0, p1, q0, q1):
    def cross(u, v):
        return (u.conjugate() * v).imag
    d, e = p1 - p0, q1 - q0
    return (cross(d, q0 - p0) * cross(d, q1 - p0) < 0) and (cross(e, p0 - q0) * cross(e, p1 - q0) < 0)


def _bent_bridge(curve, z0, z1, n=200):
    """∫ y dz from branch point z0 to branch point z1 along a two-leg path
    through a midpoint pushed sideways off the straight segment.

    Independent of the straight-segment quadrature used for the L values;
    both agree when the bent path stays in the same homotopy class.
    """
    x, wts = np.polynomial.legendre.leggauss(n)
    u = (x + 1) / 2
    for side in (1, -1):
        mid = (z0 + z1) / 2 + side * 0.25j * (z1 - z0)
        legs = ((z0, mid), (mid, z1))
        if any(_segments_cross(a, b, c.a_minus, c.a_plus) for a, b in legs for c in curve.cuts):
            continue
        total = 0j
        for end, other in ((z0, mid), (z1, mid)):
            # z = end + (other - end) u² removes the square-root singularity at the branch point
            z = end + (other - end) * u * u
            val = np.dot(wts / 2, curve.y(z) * 2 * (other - end) * u)
            total += val if end == z0 else -val
        return complex(total)
    raise ValueError("no bent path avoids the cuts")


def special_geometry_check(curve, closed_form_L=None):
    """Deviations in the special-geometry relations of ``curve``.

    Checks the partial periods, the total-period relation, the regularized
    B-hat period against the ray value of L_s (radii R, 2R, 4R, 8R with
    three Richardson levels), the B-period differences of the L_j, and optionally
    a closed-form L vector.  B-period differences are
    integrated along bent paths, independently of the straight bridges.
    """
    from .curve import period_integral
    from .prepotential import L_values

    S = np.array([c.S for c in curve.cuts])
    periods = np.array([period_integral(curve, j) for j in range(curve.s)])
    scaleS = max(np.max(np.abs(S)), 1e-300)
    report = {"period_deviation": float(np.max(np.abs(periods - S)) / scaleS),
              "total_period_deviation": float(abs(periods.sum() - S.sum()) / scaleS)}
    L = L_values(curve)
    # regularized B-hat period at finite radius: L_s ≈ W(a) - 2[S log(R e^{iχ}) - ∫_a^{a+R e^{iχ}} ω]
    a = curve.cuts[-1].a_plus
    chi = curve.gamma_direction
    e = cmath.exp(1j * chi)
    R0 = 100 * curve.scale
    vals = []
    x, wts = np.polynomial.legendre.leggauss(2000)
    for R in (R0, 2 * R0, 4 * R0, 8 * R0):
        # graded mesh towards the endpoint where ω has a square-root singularity
        u = (x + 1) / 2
        r = R * u * u
        om = curve.W_minus_y(a + r * e) / 2
        integral = np.dot(wts / 2, om * e * 2 * R * u)
        St = curve.total_S
        vals.append(complex(curve.potential.W(a)) - 2 * (St * (cmath.log(R) + 1j * chi) - integral))
    # truncation error is a series in 1/R: eliminate the first three orders
    v = np.array(vals)
    for p in (1, 2, 3):
        v = (2 ** p * v[1:] - v[:-1]) / (2 ** p - 1)
    rich = v[0]
    report["regularized_L_deviation"] = float(abs(rich - L[-1]) / max(abs(L[-1]), 1e-300))
    bdev = 0.0
    for j in range(curve.s - 1):
        bridge = sum(_bent_bridge(curve, curve.cuts[m].a_plus, curve.cuts[m + 1].a_minus)
                     for m in range(j, curve.s - 1))
        bdev = max(bdev, abs((L[-1] - L[j]) - bridge) / max(abs(bridge), 1e-300))
    report["b_period_deviation"] = float(bdev)
    if closed_form_L is not None:
        cf = np.atleast_1d(closed_form_L)
        report["closed_form_L_deviation"] = float(np.max(np.abs(cf - L)) / max(np.max(np.abs(cf)), 1e-300))
    report["max_deviation"] = max(v for v in report.values())
    return report


def coalescence_check(family, gaps, alpha, one_cut=None):
    """Degeneration of the differentials along a family of two-cut curves.

    ``family(g)`` returns a two-cut curve whose inner endpoints a_1^+ and
    a_2^- are separated by roughly ``g`` around ``alpha``.  Reports
    |P₀(α)| per gap and its successive ratios, the holomorphic factor p₁,
    and, when ``one_cut`` is given, the coefficient distance between
    P₀^{(2)}(z) and (z - α) P₀^{(1)}(z).
    """
    rows = []
    for g in gaps:
        curve = family(g)
        b = holomorphic_basis(curve)
        row = {"gap": g, "P0_alpha": complex(np.polyval(b.P0, alpha)),
               "p1": complex(b.p_polys[0][-1]) if b.p_polys else 0j,
               "P0": b.P0}
        if one_cut is not None:
            limit = np.polymul([1.0, -alpha], omega0(one_cut).P0)
            row["P0_limit_distance"] = float(np.max(np.abs(b.P0 - limit)))
        rows.append(row)
    ratios = [abs(rows[k]["P0_alpha"]) / max(abs(rows[k + 1]["P0_alpha"]), 1e-300)
              for k in range(len(rows) - 1)]
    return {"rows": rows, "P0_alpha_ratios": ratios}
