"""Instantaneous functionals of a radial field.

All 3D integrals reduce through w = r^{1/2} u and the r dr quadrature:

    mass      M = int |u|^2 dx              = 4 pi sum q_n |w_n|^2
    kinetic   K = int (|grad u|^2 + a|u|^2/|x|^2) dx = 4 pi sum k_m^2 |psi_m|^2
    potential P = int |u|^4 / |x|^b dx      = 4 pi sum q_n |w_n|^4 r_n^{-1-b}
    energy    E = K/2 + lambda P/4

together with fractional norms, the Gagliardo-Nirenberg quotient
P / (M^{(1-b)/2} K^{(3-b)/2}), virial actions V(t;w) = 2 Im int conj(u)
grad u . grad w dx for polynomial and truncated weights, mass on balls,
and the Strichartz admissibility arithmetic 2/q + 3/r = 3/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import RadialField, hankel_forward, radial_derivative
from .params import PhysicsParams

__all__ = [
    "mass", "hardy_kinetic", "fractional_norm", "potential_term", "energy",
    "h1a_norm", "gn_quotient", "VirialWeight", "quadratic_weight",
    "truncated_weight", "virial_action", "virial_rhs", "mass_in_ball",
    "admissible_pair", "FunctionalValues", "functional_values",
]

FOUR_PI = 4.0 * math.pi


def mass(f: RadialField) -> float:
    return FOUR_PI * float(np.sum(f.grid.weights * np.abs(f.values) ** 2))


def hardy_kinetic(f: RadialField) -> float:
    """Squared homogeneous Sobolev norm of sqrt(L_a): 4 pi sum k^2 |psi|^2."""
    psi = hankel_forward(f).coeffs
    return FOUR_PI * float(np.sum(f.grid.k**2 * np.abs(psi) ** 2))


def fractional_norm(f: RadialField, s: float) -> float:
    """Spectral fractional norm (4 pi sum k^{2s} |psi|^2)^{1/2}, 0 <= s <= 1."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("fractional order must lie in [0, 1]")
    psi = hankel_forward(f).coeffs
    return math.sqrt(FOUR_PI * float(np.sum(f.grid.k ** (2.0 * s) * np.abs(psi) ** 2)))


def potential_term(f: RadialField, b: float) -> float:
    g = f.grid
    return FOUR_PI * float(
        np.sum(g.weights * np.abs(f.values) ** 4 * g.r ** (-1.0 - b))
    )


def energy(f: RadialField, p: PhysicsParams) -> float:
    return 0.5 * hardy_kinetic(f) + 0.25 * p.lam * potential_term(f, p.b)


def h1a_norm(f: RadialField) -> float:
    """Inhomogeneous Sobolev norm sqrt(M + K) attached to L_a."""
    return math.sqrt(mass(f) + hardy_kinetic(f))


@dataclass(frozen=True)
class FunctionalValues:
    M: float
    K: float
    P: float
    E: float


def functional_values(f: RadialField, p: PhysicsParams) -> FunctionalValues:
    M = mass(f)
    K = hardy_kinetic(f)
    P = potential_term(f, p.b)
    return FunctionalValues(M=M, K=K, P=P, E=0.5 * K + 0.25 * p.lam * P)


def gn_quotient(f: RadialField, p: PhysicsParams) -> float:
    """Weighted Gagliardo-Nirenberg quotient P / (M^{(1-b)/2} K^{(3-b)/2})."""
    M = mass(f)
    if M == 0.0:
        raise ValueError("Gagliardo-Nirenberg quotient undefined for the zero field")
    K = hardy_kinetic(f)
    P = potential_term(f, p.b)
    return P / (M ** (0.5 * (1.0 - p.b)) * K ** (0.5 * (3.0 - p.b)))


# ---------------------------------------------------------------------------
# Virial weights
# ---------------------------------------------------------------------------

@dataclass
class VirialWeight:
    """Radial weight tabulated with the derivatives the virial identity needs.

    `wp`, `wpp` are d/dr and d^2/dr^2; `lap` is the 3D Laplacian
    w'' + 2w'/r and `bilap` its Laplacian again (= w'''' + 4 w'''/r for
    radial weights).  Values are tabulated on a grid's nodes.
    """

    kind: str                  # "quadratic" | "truncated"
    R: float                   # truncation radius (inf for quadratic)
    grid: object
    w: np.ndarray
    wp: np.ndarray
    wpp: np.ndarray
    lap: np.ndarray
    bilap: np.ndarray


def quadratic_weight(grid) -> VirialWeight:
    r = grid.r
    return VirialWeight(
        kind="quadratic", R=math.inf, grid=grid,
        w=r**2, wp=2.0 * r, wpp=np.full_like(r, 2.0),
        lap=np.full_like(r, 6.0), bilap=np.zeros_like(r),
    )


def _blend_poly():
    # quintic g on [0,1] with g(0), g'(0), g''(0) = 1/4, 1/2, 1/2 and
    # g(1), g'(1), g''(1) = 1, 1, 0; g' > 0 and g'' >= 0 throughout.
    return np.array([0.25, 0.5, 0.25, -0.25, 0.5, -0.25])


def truncated_weight_profile(r: np.ndarray, R: float):
    """(w, w', w'', w''', w'''') of the truncated virial weight at radii r.

    Equal to r^2 inside R/2 and affine 2 R r - R^2 outside R (same
    gradient field as the linear weight 2 R |x|), joined on [R/2, R] by
    a convex quintic blend: monotone and convex everywhere.
    """
    r = np.asarray(r, dtype=float)
    w = np.empty_like(r)
    wp = np.empty_like(r)
    wpp = np.empty_like(r)
    w3 = np.zeros_like(r)
    w4 = np.zeros_like(r)

    inner = r <= 0.5 * R
    outer = r > R
    band = ~inner & ~outer

    w[inner] = r[inner] ** 2
    wp[inner] = 2.0 * r[inner]
    wpp[inner] = 2.0

    w[outer] = 2.0 * R * r[outer] - R * R
    wp[outer] = 2.0 * R
    wpp[outer] = 0.0

    if np.any(band):
        c = _blend_poly()
        s = (2.0 * r[band] - R) / R
        g = np.polyval(c[::-1], s)
        gp = np.polyval(np.polyder(np.poly1d(c[::-1])), s)
        gpp = np.polyval(np.polyder(np.poly1d(c[::-1]), 2), s)
        g3 = np.polyval(np.polyder(np.poly1d(c[::-1]), 3), s)
        g4 = np.polyval(np.polyder(np.poly1d(c[::-1]), 4), s)
        w[band] = R * R * g
        wp[band] = 2.0 * R * gp
        wpp[band] = 4.0 * gpp
        w3[band] = (8.0 / R) * g3
        w4[band] = (16.0 / (R * R)) * g4
    return w, wp, wpp, w3, w4


def truncated_weight(grid, R: float, audit: bool = True) -> VirialWeight:
    """Tabulate the truncated weight on a grid; optionally audit monotonicity/convexity."""
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    if audit:
        rr = np.linspace(1e-6 * R, 2.0 * R, 4001)
        _, wp, wpp, _, _ = truncated_weight_profile(rr, R)
        if np.min(wp) < -1e-12 * R or np.min(wpp) < -1e-12:
            raise AssertionError("truncated weight violates monotonicity/convexity")
    w, wp, wpp, w3, w4 = truncated_weight_profile(grid.r, R)
    lap = wpp + 2.0 * wp / grid.r
    bilap = w4 + 4.0 * w3 / grid.r
    return VirialWeight(kind="truncated", R=float(R), grid=grid,
                        w=w, wp=wp, wpp=wpp, lap=lap, bilap=bilap)


def virial_action(f: RadialField, weight: VirialWeight) -> float:
    """V(t;w) = 2 Im int conj(u) grad u . grad w dx.

    In the reduced variable: 8 pi int w'(r) Im(conj(w) w_r) r dr, with the
    radial derivative taken through the spectral basis.
    """
    if not f.grid.same_as(weight.grid):
        raise ValueError("weight tabulated on a different grid")
    vp = radial_derivative(f)
    integrand = weight.wp * np.imag(np.conj(f.values) * vp)
    return 8.0 * math.pi * float(np.sum(f.grid.weights * integrand))


def virial_rhs(f: RadialField, p: PhysicsParams, weight: VirialWeight) -> float:
    """Time derivative of V(t;w) along the flow, from the tabulated weight.

    For the exact quadratic weight the assembled terms collapse to the
    closed form 8K + (6 + 2b) lambda P; that short cut is taken.  For a
    general weight the five terms are assembled:

        - bilap |u|^2, 4 w'' |u_r|^2, 4a (w'/r^3)|u|^2,
        lambda b (w'/r^{1+b}) |u|^4 / r, lambda lap |u|^4 / r^b,

    integrated against dx (radial reduction; the angular part of the
    Hessian term vanishes for radial u).
    """
    if not f.grid.same_as(weight.grid):
        raise ValueError("weight tabulated on a different grid")
    if weight.kind == "quadratic":
        K = hardy_kinetic(f)
        P = potential_term(f, p.b)
        return 8.0 * K + (6.0 + 2.0 * p.b) * p.lam * P

    g = f.grid
    r = g.r
    v = f.values
    vp = radial_derivative(f)
    av2 = np.abs(v) ** 2
    av4 = av2 * av2
    ur_sq_r = np.abs(vp - 0.5 * v / r) ** 2      # |u_r|^2 * r

    t_bilap = -np.sum(g.weights * weight.bilap * av2)
    t_hess = 4.0 * np.sum(g.weights * weight.wpp * ur_sq_r)
    t_hardy = 4.0 * p.a * np.sum(g.weights * weight.wp * av2 / r**3)
    t_grad_pot = p.lam * p.b * np.sum(g.weights * weight.wp * av4 * r ** (-2.0 - p.b))
    t_lap_pot = p.lam * np.sum(g.weights * weight.lap * av4 * r ** (-1.0 - p.b))
    return FOUR_PI * float(t_bilap + t_hess + t_hardy + t_grad_pot + t_lap_pot)


def mass_in_ball(f: RadialField, R: float) -> float:
    """4 pi sum over nodes r_n < R of q_n |w_n|^2 (sharp indicator cutoff)."""
    if R <= 0:
        raise ValueError("ball radius must be positive")
    g = f.grid
    inside = g.r < R
    return FOUR_PI * float(np.sum(g.weights[inside] * np.abs(f.values[inside]) ** 2))


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x):
            return None
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exponent")


def admissible_pair(q, r) -> bool:
    """True iff q, r >= 2 and 2/q + 3/r = 3/2 (Schrodinger-admissible in 3D).

    Exact arithmetic: finite inputs are converted to Fractions (floats
    are taken at their exact binary value); infinities contribute zero.
    """
    fq, fr = _as_fraction(q), _as_fraction(r)
    if fq is not None and fq < 2:
        return False
    if fr is not None and fr < 2:
        return False
    sq = Fraction(0) if fq is None else Fraction(2) / fq
    sr = Fraction(0) if fr is None else Fraction(3) / fr
    return sq + sr == Fraction(3, 2)
