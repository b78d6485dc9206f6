"""Physical parameters of the model and the exponents derived from them.

The equation under study is

    i u_t - L_a u = lambda |x|^{-b} |u|^2 u,   L_a = -Delta + a/|x|^2,

posed for radial data on R^3.  The coupling ``a`` must stay above the
Hardy threshold -1/4 for L_a to be a positive operator; the
inhomogeneity exponent ``b`` lives in (0, 1), with b = 0 admitted as a
cross-check against the classical cubic NLS.  ``lambda`` is +1
(defocusing) or -1 (focusing).

Derived quantities:

    nu  = sqrt(1/4 + a)   Bessel order diagonalizing L_a on radial data
    sigma = 1/2 - nu      near-origin exponent r^{-sigma} (positive iff a < 0)
    s_c = (1 + b)/2       scaling-critical Sobolev regularity
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HARDY_THRESHOLD = -0.25


@dataclass(frozen=True)
class PhysicsParams:
    """Coupling constants (a, b, lambda) of the equation."""

    a: float
    b: float
    lam: int = 1

    def __post_init__(self):
        if not self.a > HARDY_THRESHOLD:
            raise ValueError(
                f"coupling a={self.a} violates the Hardy threshold: require a > -1/4"
            )
        if not (0.0 <= self.b < 1.0):
            raise ValueError(
                f"inhomogeneity exponent b={self.b} out of range: require 0 < b < 1 "
                "(b = 0 accepted for classical-NLS cross-checks)"
            )
        if self.lam not in (+1, -1):
            raise ValueError(f"lambda must be +1 (defocusing) or -1 (focusing), got {self.lam}")

    @property
    def defocusing(self) -> bool:
        return self.lam == +1


@dataclass(frozen=True)
class DerivedParams:
    """Exponents derived from (a, b): Bessel order, origin exponent, critical regularity."""

    nu: float
    sigma: float
    s_c: float


def derive_params(p: PhysicsParams) -> DerivedParams:
    """Compute nu = sqrt(1/4 + a), sigma = 1/2 - nu and s_c = (1 + b)/2."""
    nu = math.sqrt(0.25 + p.a)
    return DerivedParams(nu=nu, sigma=0.5 - nu, s_c=0.5 * (1.0 + p.b))
