"""Radial fields, their Hankel-space counterparts, and the free propagator.

A field is stored through its reduced samples w(r_n) = r_n^{1/2} u(r_n)
on a Bessel-zero grid; in that variable the order-nu discrete Hankel
transform applies verbatim and L_a is exactly diagonal.  Spectral
coefficients are normalized so that

    mass = 4*pi * sum_n q_n |w(r_n)|^2 = 4*pi * sum_m |psi_m|^2,

i.e. `coeffs` are coordinates in the quadrature-orthonormalized basis
r^{-1/2} J_nu(k_m r).  The free flow e^{-i t L_a} is the diagonal phase
e^{-i t k_m^2} between a transform pair, hence exactly unitary here.
"""

from __future__ import annotations

import io
import re
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import RadialGrid
from .params import PhysicsParams

__all__ = [
    "RadialField",
    "SpectralField",
    "GridMismatchError",
    "hankel_forward",
    "hankel_inverse",
    "linear_propagate",
    "scale_field",
    "field_from_profile",
    "evaluate_field",
    "write_field_snapshot",
    "read_field_snapshot",
]


class GridMismatchError(ValueError):
    """Raised when fields attached to different grids are combined."""


@dataclass
class RadialField:
    """Complex radial field sampled as w(r_n) = r_n^{1/2} u(r_n)."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.N,):
            raise ValueError("sample count does not match the grid")

    @property
    def u(self) -> np.ndarray:
        """Samples of the 3D radial profile u(r_n)."""
        return self.values / np.sqrt(self.grid.r)

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy())

    def check_same_grid(self, other) -> None:
        if not self.grid.same_as(other.grid):
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other: "RadialField") -> "RadialField":
        self.check_same_grid(other)
        return RadialField(self.grid, self.values + other.values)

    def __sub__(self, other: "RadialField") -> "RadialField":
        self.check_same_grid(other)
        return RadialField(self.grid, self.values - other.values)

    def __mul__(self, c) -> "RadialField":
        return RadialField(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass
class SpectralField:
    """Coefficients on the frequencies k_m, quadrature-orthonormalized."""

    grid: RadialGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.grid.N,):
            raise ValueError("coefficient count does not match the grid")


def hankel_forward(f: RadialField) -> SpectralField:
    g = f.grid
    return SpectralField(g, g.transform @ (g.sqrt_q * f.values))


def hankel_inverse(F: SpectralField) -> RadialField:
    g = F.grid
    return RadialField(g, (g.transform @ F.coeffs) / g.sqrt_q)


def linear_propagate(f: RadialField, t: float) -> RadialField:
    """Apply the free flow e^{-i t L_a}: diagonal phase e^{-i t k^2} in Hankel space."""
    if t == 0.0:
        return f.copy()
    F = hankel_forward(f)
    F.coeffs *= np.exp(-1j * t * f.grid.k**2)
    return hankel_inverse(F)


def field_from_profile(grid: RadialGrid, profile: Callable[[np.ndarray], np.ndarray]) -> RadialField:
    """Sample a 3D radial profile u(r) onto the grid (reduced storage)."""
    u = np.asarray(profile(grid.r), dtype=complex)
    return RadialField(grid, np.sqrt(grid.r) * u)


def evaluate_field(f: RadialField, radii: np.ndarray, reduced: bool = False) -> np.ndarray:
    """Evaluate the spectral interpolant of f at arbitrary radii.

    Returns u(radii) by default, or the reduced w(radii) with
    ``reduced=True``.  Radii beyond the grid range evaluate through the
    same series (the basis vanishes at r_max).
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    psi = hankel_forward(f).coeffs
    w = f.grid.basis_matrix(radii) @ psi
    if reduced:
        return w
    return w / np.sqrt(radii)


def radial_derivative(f: RadialField) -> np.ndarray:
    """d/dr of the reduced field w at the nodes (dense spectral differentiation)."""
    return f.grid.deriv @ f.values


def u_radial_derivative(f: RadialField) -> np.ndarray:
    """d/dr of the 3D profile u = r^{-1/2} w at the nodes."""
    r = f.grid.r
    wp = radial_derivative(f)
    return (wp - 0.5 * f.values / r) / np.sqrt(r)


def scale_field(f: RadialField, mu: float, p: PhysicsParams) -> RadialField:
    """Critical rescaling u_mu(x) = mu^{(2-b)/2} u(mu x) resampled on the grid.

    In the reduced variable this is w_mu(r) = mu^{(1-b)/2} w(mu r),
    evaluated through the spectral interpolant.  Warns when the scaling
    pushes significant spectral content past the band edge (mu > 1) or
    significant mass toward the wall (mu < 1).
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if mu == 1.0:
        return f.copy()
    g = f.grid
    psi = hankel_forward(f).coeffs
    power = np.abs(psi) ** 2
    total = float(np.sum(power))
    if total > 0.0:
        band = g.k <= g.k[-1] / mu
        out_band = 1.0 - float(np.sum(power[band])) / total
        if out_band > 1e-8:
            warnings.warn(
                f"scale_field(mu={mu}): fraction {out_band:.2e} of spectral mass "
                "maps beyond the resolved band",
                stacklevel=2,
            )
        phys = np.abs(f.values) ** 2 * g.weights
        outer = g.r > 0.9 * g.r_max * mu
        out_wall = float(np.sum(phys[outer])) / float(np.sum(phys))
        if out_wall > 1e-8:
            warnings.warn(
                f"scale_field(mu={mu}): fraction {out_wall:.2e} of mass lands in "
                "the outer 10% shell after rescaling",
                stacklevel=2,
            )
    target = mu * g.r
    w = g.basis_matrix(target) @ psi
    w[target > g.r_max] = 0.0
    return RadialField(g, mu ** (0.5 * (1.0 - p.b)) * w)


# ---------------------------------------------------------------------------
# Field snapshot files: plain text, 17 significant digits, one node per row.
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(
    r"^# inls-field a=(?P<a>\S+) b=(?P<b>\S+) nu=(?P<nu>\S+) N=(?P<N>\d+) "
    r"Rmax=(?P<Rmax>\S+) t=(?P<t>\S+)\s*$"
)


def write_field_snapshot(path_or_stream, f: RadialField, p: PhysicsParams, t: float) -> None:
    """Write `# inls-field ...` header plus rows `r_n Re(u) Im(u)`."""
    g = f.grid
    u = f.u
    own = isinstance(path_or_stream, (str, bytes))
    stream = open(path_or_stream, "w") if own else path_or_stream
    try:
        stream.write(
            f"# inls-field a={p.a!r} b={p.b!r} nu={g.nu!r} N={g.N} Rmax={g.r_max!r} t={t!r}\n"
        )
        for rn, un in zip(g.r, u):
            stream.write(f"{rn:.17g} {un.real:.17g} {un.imag:.17g}\n")
    finally:
        if own:
            stream.close()


def read_field_snapshot(path_or_stream, grid: RadialGrid = None):
    """Read a snapshot; returns (field, header) with header keys a, b, nu, N, Rmax, t.

    If `grid` is given it must match the header (nu, N, Rmax); otherwise
    a fresh grid is built.
    """
    from .grid import build_grid

    own = isinstance(path_or_stream, (str, bytes))
    stream = open(path_or_stream, "r") if own else path_or_stream
    try:
        first = stream.readline()
        m = _HEADER_RE.match(first)
        if not m:
            raise ValueError("not an inls-field snapshot (bad header line)")
        header = {
            "a": float(m["a"]), "b": float(m["b"]), "nu": float(m["nu"]),
            "N": int(m["N"]), "Rmax": float(m["Rmax"]), "t": float(m["t"]),
        }
        rows = np.loadtxt(io.StringIO(stream.read()), ndmin=2)
    finally:
        if own:
            stream.close()
    if rows.shape != (header["N"], 3):
        raise ValueError("snapshot row count does not match header N")
    if grid is None:
        grid = build_grid(header["nu"], header["N"], header["Rmax"])
    else:
        if grid.N != header["N"] or abs(grid.nu - header["nu"]) > 1e-12 or grid.r_max != header["Rmax"]:
            raise GridMismatchError("snapshot header does not match the supplied grid")
    u = rows[:, 1] + 1j * rows[:, 2]
    return RadialField(grid, np.sqrt(grid.r) * u), header
