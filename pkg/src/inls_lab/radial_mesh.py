"""Geometrically graded Gauss-Legendre mesh for singular radial integrals.

Ground-state profiles behave like r^{beta} with fractional beta near the
origin, and the cubic inhomogeneous nonlinearity adds r^{-1-b} on top.
Uniform-in-r quadratures converge only algebraically on such integrands;
a composite Gauss-Legendre rule on geometric panels [a, 2a] converges
at machine precision instead, because on every panel the integrand is
analytic (the algebraic singularity sits at the panel-distance origin).

The mesh provides the operations the elliptic solver needs:

* plain quadrature of node samples over [0, r_max],
* running integrals int_0^r and int_r^{r_max} evaluated at every node
  (panel-wise Legendre antiderivatives, exact for the interpolant),
* panel-wise spectral differentiation,
* interpolation of node samples to arbitrary radii.

The stub [0, r_min] is dropped; for integrands ~ r^{gamma} with
gamma > -1 this contributes O(r_min^{gamma+1}), negligible for the
default r_min = 1e-12 and the exponents arising here.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander

__all__ = ["GradedMesh"]


def _legendre_apparatus(order: int):
    """Reference-panel matrices on [-1, 1] for `order` Gauss-Legendre nodes."""
    t, w = leggauss(order)
    V = legvander(t, order - 1)
    Vinv = np.linalg.inv(V)

    # antiderivatives: int_{-1}^{x} P_0 = x + 1;  int_{-1}^{x} P_k = (P_{k+1} - P_{k-1})/(2k+1)
    A = np.empty((order, order))
    A[:, 0] = t + 1.0
    if order > 1:
        Vext = legvander(t, order)
        for k in range(1, order):
            A[:, k] = (Vext[:, k + 1] - Vext[:, k - 1]) / (2 * k + 1)
    B_low = A @ Vinv                      # node values -> int from panel start to node
    full = np.zeros(order)
    full[0] = 2.0
    B_high = (full @ Vinv)[None, :] - B_low   # int from node to panel end

    # derivative values P_k'(t) by the interior recurrence (GL nodes avoid +-1)
    Vd = np.empty((order, order))
    Vd[:, 0] = 0.0
    if order > 1:
        Vd[:, 1] = 1.0
        for k in range(2, order):
            Vd[:, k] = (k / (t**2 - 1.0)) * (t * V[:, k] - V[:, k - 1])
    D = Vd @ Vinv
    return t, w, Vinv, B_low, B_high, D


class GradedMesh:
    def __init__(self, r_max: float, r_min: float = 1e-12, order: int = 20,
                 ratio: float = 2.0):
        if r_max <= r_min:
            raise ValueError("r_max must exceed r_min")
        edges = [r_min]
        while edges[-1] < r_max:
            edges.append(min(edges[-1] * ratio, r_max))
        self.edges = np.asarray(edges)
        self.order = order
        self.n_panels = len(edges) - 1

        t, w, self._Vinv, self._B_low, self._B_high, self._D = _legendre_apparatus(order)
        self._t = t
        lo = self.edges[:-1][:, None]
        hi = self.edges[1:][:, None]
        self._half = 0.5 * (hi - lo)              # (panels, 1)
        self._mid = 0.5 * (hi + lo)
        self.nodes = (self._mid + self._half * t[None, :]).ravel()
        self.weights = (self._half * w[None, :]).ravel()
        self.r_max = float(r_max)

    # -- quadrature ---------------------------------------------------------

    def integrate(self, fvals: np.ndarray) -> float:
        return float(np.real(np.sum(self.weights * fvals))) if np.isrealobj(fvals) \
            else complex(np.sum(self.weights * fvals))

    def _panels(self, fvals):
        return np.asarray(fvals).reshape(self.n_panels, self.order)

    def cumulative_from_zero(self, fvals: np.ndarray) -> np.ndarray:
        """int_0^{node} f dr at every node ([0, r_min] stub neglected)."""
        fp = self._panels(fvals)
        partial = (fp @ self._B_low.T) * self._half
        totals = np.sum(fp * self.weights.reshape(self.n_panels, self.order), axis=1)
        prefix = np.concatenate(([0.0], np.cumsum(totals)[:-1]))
        return (partial + prefix[:, None]).ravel()

    def cumulative_to_end(self, fvals: np.ndarray) -> np.ndarray:
        """int_{node}^{r_max} f dr at every node."""
        fp = self._panels(fvals)
        partial = (fp @ self._B_high.T) * self._half
        totals = np.sum(fp * self.weights.reshape(self.n_panels, self.order), axis=1)
        suffix = np.concatenate((np.cumsum(totals[::-1])[::-1][1:], [0.0]))
        return (partial + suffix[:, None]).ravel()

    # -- calculus on samples -------------------------------------------------

    def derivative(self, fvals: np.ndarray) -> np.ndarray:
        fp = self._panels(fvals)
        return ((fp @ self._D.T) / self._half).ravel()

    def interpolate(self, fvals: np.ndarray, radii: np.ndarray) -> np.ndarray:
        """Evaluate the panel-wise Legendre interpolant at arbitrary radii.

        Radii outside [r_min, r_max] evaluate to 0.
        """
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        coeffs = self._panels(fvals) @ self._Vinv.T     # (panels, order) Legendre coeffs
        out = np.zeros(radii.shape, dtype=coeffs.dtype)
        idx = np.searchsorted(self.edges, radii, side="right") - 1
        valid = (idx >= 0) & (idx < self.n_panels)
        if np.any(valid):
            pid = idx[valid]
            x = (radii[valid] - self._mid[pid, 0]) / self._half[pid, 0]
            vx = legvander(x, self.order - 1)
            out[valid] = np.sum(vx * coeffs[pid], axis=1)
        return out
