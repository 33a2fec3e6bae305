"""Prepotential, the constants L_i, superpotentials and vacua.

The numeric prepotential of an s-cut curve is

    F = 1/2 ∫_γ W dq + 1/2 Σ_i S_i L_i,      dq = y(z_+) dz / 2πi,

where γ is the union of the cuts and L_i = W - g_+ - g_- on cut i, with
g(z) = ∫ dq(z') log(z - z').  The logarithm branch cuts run along a path
Γ that comes in from infinity on the far side of the first cut, joins all
cuts by straight bridges and ends at a_s^+.  Consequently g(a_s^+) is
obtained by integrating the resolvent ω = (W' - y)/2 inward along the
outgoing ray from a_s^+, and the other L_j follow from bridge integrals.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curve import TWO_PI_I, SpectralCurve, CutSpec, InconsistentBranchError
from .poly import Potential

LOG_CONVENTION = "principal"


class SingularConfigurationError(ArithmeticError):
    """A closed-form expression hits one of its singular points."""


@dataclass
class PrepotentialReport:
    F: complex
    L: np.ndarray
    dF2: np.ndarray | None = None
    source: str = "numeric"


@dataclass
class VacuumSolution:
    label: tuple
    Lambda_sq: complex
    S_vev: np.ndarray
    beta: complex | None
    W_low: complex
    trPhi: complex | None
    residual: float = 0.0
    curve: SpectralCurve | None = field(default=None, repr=False)


# -- closed forms -------------------------------------------------------------

def gaussian_prepotential(S):
    """(3/4 - log(S)/2) S² with the principal logarithm."""
    S = complex(S)
    if S == 0:
        raise ValueError("S must be nonzero")
    return (0.75 - 0.5 * cmath.log(S)) * S * S


def gaussian_L(S):
    S = complex(S)
    return S * (1 - cmath.log(S))


def cubic_prepotential(w, beta):
    """Closed-form one-cut prepotential of W = z³/3 - w z as a function of β.

    F = β⁶/2 - (5/12) w β⁴ - (S²/2) Log((w - β²)/2) with S = wβ - β³ and
    the principal Log.  The numeric prepotential differs from this by the
    constant w³/12.
    """
    w, beta = complex(w), complex(beta)
    arg = (w - beta * beta) / 2
    if arg == 0:
        raise SingularConfigurationError("β² = w: logarithmic singularity")
    S = w * beta - beta ** 3
    return beta ** 6 / 2 - 5 / 12 * w * beta ** 4 - S * S / 2 * cmath.log(arg)


def cubic_L(w, beta):
    """dF/dS for the cubic one-cut closed form: -(2/3)β³ - S Log((w - β²)/2)."""
    w, beta = complex(w), complex(beta)
    S = w * beta - beta ** 3
    return -2 / 3 * beta ** 3 - S * cmath.log((w - beta * beta) / 2)


def d2F_one_cut(curve):
    """-Log(((b - a)/4)²) for a one-cut curve."""
    _require_one_cut(curve)
    c = curve.cuts[0]
    return -cmath.log(((c.a_plus - c.a_minus) / 4) ** 2)


def d3F_one_cut(curve):
    """-(8/(b-a)²) (1/h(a) + 1/h(b)) for a one-cut curve."""
    _require_one_cut(curve)
    c = curve.cuts[0]
    ha, hb = complex(curve.h(c.a_minus)), complex(curve.h(c.a_plus))
    tol = 1e-12 * max(1.0, abs(c.a_plus - c.a_minus))
    if abs(ha) < tol or abs(hb) < tol:
        raise SingularConfigurationError("a double root of y² sits at a cut endpoint")
    return -8 / (c.a_plus - c.a_minus) ** 2 * (1 / ha + 1 / hb)


def _require_one_cut(curve):
    if curve.s != 1:
        raise ValueError("closed form is only valid for one-cut curves")


# -- numeric ------------------------------------------------------------------

def ray_g(curve, kappa=None):
    """g(a_s^+) by integrating the resolvent along the outgoing ray."""
    last = curve.cuts[-1]
    a = last.a_plus
    chi = curve.gamma_direction
    S = curve.total_S
    kappa = kappa or max(abs(last.delta), 1e-3)

    def integrand(z, r):
        return curve.W_minus_y(z) / 2 - S / (r + kappa) * cmath.exp(-1j * chi)

    tail = curve.ray_integral(a, chi, integrand, kappa)
    return S * (math.log(kappa) + 1j * chi) - tail


def L_values(curve):
    """The constants L_i = W - g_+ - g_- on every cut."""
    s = curve.s
    L = np.zeros(s, dtype=complex)
    a = curve.cuts[-1].a_plus
    L[-1] = complex(curve.potential.W(a)) - 2 * ray_g(curve)
    for j in range(s - 2, -1, -1):
        bridge = curve.bridge_integral(curve.cuts[j].a_plus, curve.cuts[j + 1].a_minus)
        L[j] = L[j + 1] - bridge
    return L


def numeric_prepotential(curve, with_hessian=False):
    """F = 1/2 ∫ W dq + 1/2 Σ S_i L_i by quadrature."""
    W = curve.potential.W
    part = sum(curve.cut_integral(j, W) for j in range(curve.s)) / TWO_PI_I
    L = L_values(curve)
    S = np.array([c.S for c in curve.cuts])
    F = 0.5 * part + 0.5 * np.dot(S, L)
    dF2 = None
    if with_hessian:
        if curve.s == 1:
            dF2 = np.array([[d2F_one_cut(curve)]])
        else:
            from .abelian import d2F_matrix
            dF2 = d2F_matrix(curve)
    return PrepotentialReport(complex(F), L, dF2, "numeric")


def gaussian_curve(S):
    S = complex(S)
    r = 2 * cmath.sqrt(S)
    return SpectralCurve(Potential.gaussian(), (CutSpec(-r, r, S),))


# -- superpotentials and vacua -----------------------------------------------

def log_lambda_2N(Lambda, N):
    """Principal value 2N log Λ of log Λ^{2N}."""
    return 2 * N * cmath.log(complex(Lambda))


def superpotential_eff(curve, N_parts, Lambda, log_L2N=None):
    """W_eff = Σ N_i L_i + S log Λ^{2N}.

    ``log_L2N`` selects the branch of log Λ^{2N}; by default 2N Log Λ.
    """
    N_parts = np.atleast_1d(N_parts)
    N = int(np.sum(N_parts))
    if log_L2N is None:
        log_L2N = log_lambda_2N(Lambda, N)
    L = L_values(curve)
    return complex(np.dot(N_parts, L) + curve.total_S * log_L2N)


def cubic_superpotential(w, beta, N, Lambda):
    """-(2/3) N β³ + S N Log(2Λ²/(w - β²)) for the one-cut cubic sector."""
    w, beta, Lambda = complex(w), complex(beta), complex(Lambda)
    S = w * beta - beta ** 3
    return -2 / 3 * N * beta ** 3 + S * N * cmath.log(2 * Lambda ** 2 / (w - beta * beta))


def reduce_mod_2pi_i(z):
    """Shift the imaginary part of ``z`` into (-π, π]."""
    z = complex(z)
    im = z.imag - 2 * math.pi * math.floor((z.imag + math.pi) / (2 * math.pi))
    if im <= -math.pi:
        im += 2 * math.pi
    return complex(z.real, im)


def field_equation_residual(curve, N_parts, Lambda):
    """Σ_i N_i ∂²F/∂S_i∂S_j + log Λ^{2N}, reduced mod 2πi, for every j."""
    N_parts = np.atleast_1d(N_parts)
    N = int(np.sum(N_parts))
    if curve.s == 1:
        H = np.array([[d2F_one_cut(curve)]])
    else:
        from .abelian import d2F_matrix
        H = d2F_matrix(curve)
    raw = N_parts @ H + log_lambda_2N(Lambda, N)
    return np.array([reduce_mod_2pi_i(r) for r in raw])


def solve_vacua_gaussian(N, Lambda):
    """The N vacua S = ζ_k Λ² of the Gaussian model."""
    if N < 1:
        raise ValueError("N must be positive")
    L2 = complex(Lambda) ** 2
    out = []
    for k in range(N):
        zeta = cmath.exp(TWO_PI_I * k / N)
        S = zeta * L2
        curve = gaussian_curve(S)
        res = field_equation_residual(curve, [N], Lambda)
        out.append(VacuumSolution((k,), L2, np.array([S]), None, N * S, None,
                                  float(np.max(np.abs(res))), curve))
    return out


def solve_vacua_cubic_one_cut(w, N, Lambda, on_degenerate="raise"):
    """The 2N one-cut vacua of the cubic model.

    δ² = 4Λ²ζ_k, β = ±sqrt(w - 2Λ²ζ_k), S = βδ²/2 and
    W_low = -(2/3) N β³ = ∓(2/3) N (w - 2Λ²ζ_k)^{3/2}.

    At w = 2Λ²ζ_k the two vacua of that k coincide with β = 0; with
    ``on_degenerate="flag"`` they are returned as a single entry labelled
    (k, "degenerate") with a NaN residual instead of raising.
    """
    if N < 1:
        raise ValueError("N must be positive")
    w, Lambda = complex(w), complex(Lambda)
    L2 = Lambda ** 2
    out = []
    for k in range(N):
        zeta = cmath.exp(TWO_PI_I * k / N)
        x = w - 2 * L2 * zeta
        if abs(x) < 1e-14 * max(1.0, abs(w)):
            if on_degenerate == "flag":
                out.append(VacuumSolution((k, "degenerate"), L2, np.array([0j]), 0j, 0j, 0j,
                                          float("nan"), None))
                continue
            raise SingularConfigurationError(f"w = 2Λ²ζ_{k}: branch point of the moduli space")
        root = cmath.sqrt(x)
        for sign, lab in ((1, "+"), (-1, "-")):
            beta = sign * root
            delta2 = 4 * L2 * zeta
            S = beta * delta2 / 2
            delta = cmath.sqrt(delta2)
            curve = SpectralCurve(Potential.cubic(w), (CutSpec(beta - delta, beta + delta, S),))
            W_low = -sign * 2 / 3 * N * x * root
            res = field_equation_residual(curve, [N], Lambda)
            out.append(VacuumSolution((k, lab), L2, np.array([S]), beta, W_low, N * beta,
                                      float(np.max(np.abs(res))), curve))
    return out


def classical_vevs(p, N_parts, Lambda, k=None, points=None):
    """Leading classical-limit vevs S_j = e^{2πi k_j/N_j} W''(a_j) Λ² Π (Λ/Δ_jk)^{2N_k/N_j}."""
    N_parts = [int(n) for n in np.atleast_1d(N_parts)]
    s = len(N_parts)
    pts = list(points) if points is not None else list(p.critical_points[:s])
    k = list(k) if k is not None else [0] * s
    Lambda = complex(Lambda)
    out = []
    for j in range(s):
        val = cmath.exp(TWO_PI_I * k[j] / N_parts[j]) * complex(p.d2W(pts[j])) * Lambda ** 2
        for m in range(s):
            if m == j:
                continue
            d = pts[j] - pts[m]
            if d == 0:
                raise ZeroDivisionError("coincident critical points")
            val *= (Lambda / d) ** (2 * N_parts[m] / N_parts[j])
        out.append(val)
    return np.array(out)
