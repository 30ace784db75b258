"""Shell-energy identities behind the resolvent bounds, plus Hardy.

For a sector function u on the grid, the shell energy is

    F(r) = |h u'|^2 - (h^2 nu / r^2 + V(r) - E) |u|^2.

Multiplying by an increasing weight w and differentiating gives an exact
identity for (wF)' whose only sign-indefinite ingredients are the weight
combination 2w/r - w' and the potential combination w V' + w' V; for
repulsive potentials and the matched weight both have favorable signs,
which is what the lower-bound margin check verifies discretely
(downward jumps of V contribute nonnegative atoms to (wF)' and are
checked at the jump locations directly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import PotentialSpec, RadialGrid

__all__ = [
    "SectorFunction",
    "MarginReport",
    "shell_energy",
    "weighted_shell_identity_defect",
    "weighted_shell_lower_bound_margin",
    "hardy_check",
    "sphere_area",
]


@dataclass(frozen=True, eq=False)
class SectorFunction:
    """Complex grid function with Dirichlet padding (u = 0 at r = 0 and
    r = R + dr) and centered first/second derivative tables."""

    grid: RadialGrid
    values: np.ndarray
    du: np.ndarray = field(init=False, repr=False)
    d2u: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        u = np.asarray(self.values, dtype=complex)
        if u.shape != (self.grid.N,):
            raise ValueError("values must match the grid")
        object.__setattr__(self, "values", u)
        pad = np.concatenate([[0.0], u, [0.0]])
        dr = self.grid.dr
        object.__setattr__(self, "du", (pad[2:] - pad[:-2]) / (2.0 * dr))
        object.__setattr__(self, "d2u", (pad[2:] - 2.0 * pad[1:-1] + pad[:-2]) / dr**2)


def shell_energy(u: SectorFunction, h: float, nu: float, V: np.ndarray, E: float) -> np.ndarray:
    """F(r_j) per grid point."""
    r = u.grid.points
    return (h * np.abs(u.du)) ** 2 - (h * h * nu / r**2 + V - E) * np.abs(u.values) ** 2


def _identity_rhs(
    u: SectorFunction,
    source: np.ndarray,
    w: np.ndarray,
    wp: np.ndarray,
    h: float,
    nu: float,
    E: float,
    eps: float,
    sign: int,
    V: np.ndarray | None,
    Vp: np.ndarray | None,
) -> np.ndarray:
    r = u.grid.points
    uu = np.abs(u.values) ** 2
    out = (
        -2.0 * w * np.real(source * np.conj(u.du))
        - sign * 2.0 * eps * w * np.imag(u.values * np.conj(u.du))
        + wp * (h * np.abs(u.du)) ** 2
        + (2.0 * w / r - wp) * (h * h * nu / r**2) * uu
        + E * wp * uu
    )
    if V is not None:
        out -= (w * Vp + wp * V) * uu
    return out


def weighted_shell_identity_defect(
    u: SectorFunction,
    p: PotentialSpec,
    w: np.ndarray,
    wp: np.ndarray,
    h: float = 1.0,
    nu: float = 0.0,
    E: float = 0.0,
    eps: float = 0.0,
    sign: int = +1,
    boundary_skip: int = 2,
) -> float:
    """Max defect of the distributional identity for (wF)' over the
    interior test window.

    Both sides are built from the centered derivative tables, with the
    operator applied to u evaluated exactly from those tables, so the
    defect is pure discretization error, O(dr^2) for smooth data.  The
    window drops `boundary_skip` points at each end: test profiles need
    not extend smoothly by the zero padding (e.g. nonzero slope at R),
    which contaminates only the outermost table entries.  V must be
    absolutely continuous across the window (atoms are the lower-bound
    check's business).
    """
    grid = u.grid
    r = grid.points
    V = np.asarray(p(r), dtype=float)
    Vp = np.asarray(p.derivative(r), dtype=float)
    F = shell_energy(u, h, nu, V, E)
    source = (
        -h * h * u.d2u
        + (h * h * nu / r**2 + V - E) * u.values
        + sign * 1j * eps * u.values
    )
    rhs = _identity_rhs(u, source, w, wp, h, nu, E, eps, sign, V, Vp)
    wf = w * F
    lhs = (wf[2:] - wf[:-2]) / (2.0 * grid.dr)
    defect = np.abs(lhs - rhs[1:-1])
    k = max(int(boundary_skip) - 1, 0)
    window = defect[k : len(defect) - k] if k else defect
    return float(np.max(window))


@dataclass(frozen=True)
class MarginReport:
    margin: np.ndarray  # (wF)' - lower bound, at interior points
    interior_r: np.ndarray
    scale: float  # max |rhs|, makes the tolerance dimensionless
    tol: float  # 10 * dr^2 * scale
    min_margin: float
    passed: bool
    atom_contributions: tuple  # (location, w * jump * |u|^2) pairs, all <= 0

    def __bool__(self) -> bool:
        return self.passed


def weighted_shell_lower_bound_margin(
    u: SectorFunction,
    g: np.ndarray,
    p: PotentialSpec,
    w: np.ndarray,
    wp: np.ndarray,
    h: float,
    nu: float,
    E: float,
    eps: float,
    sign: int = +1,
) -> MarginReport:
    """Pointwise margin of the lower bound for (wF)' when u solves the
    shifted sector equation with source g.

    The bound keeps only the source, absorption, and weight-derivative
    terms; repulsivity makes the dropped terms nonnegative, so the
    margin must be >= -tol with tol = 10 dr^2 * scale.  Atoms of dV
    enter (wF)' as jumps w * (-jump) |u|^2 >= 0 and are reported
    separately as their (nonpositive) contribution w * jump * |u|^2 to
    the potential term.
    """
    grid = u.grid
    r = grid.points
    V = np.asarray(p(r), dtype=float)
    F = shell_energy(u, h, nu, V, E)
    rhs = _identity_rhs(u, np.asarray(g, dtype=complex), w, wp, h, nu, E, eps, sign, None, None)
    wf = w * F
    lhs = (wf[2:] - wf[:-2]) / (2.0 * grid.dr)
    margin = lhs - rhs[1:-1]
    scale = float(np.max(np.abs(rhs))) or 1.0
    tol = 10.0 * grid.dr**2 * scale
    atoms = []
    for loc, jump in p.jumps:
        j = int(round(loc / grid.dr)) - 1
        if 0 <= j < grid.N:
            atoms.append((loc, float(w[j] * jump * abs(u.values[j]) ** 2)))
    return MarginReport(
        margin=margin,
        interior_r=r[1:-1],
        scale=scale,
        tol=tol,
        min_margin=float(margin.min()),
        passed=bool(margin.min() >= -tol) and all(a[1] <= 0 for a in atoms),
        atom_contributions=tuple(atoms),
    )


def sphere_area(n: int) -> float:
    """(n-1)-dimensional volume of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def hardy_check(u, du, n: int, r_max: float = 12.0, num: int = 24001):
    """Both sides of the radial Hardy inequality
        ||u/r||^2 <= (2/(n-2))^2 ||u'||^2
    in L^2(R^n) for a radial profile, by fine trapezoid quadrature.
    u and du are callables on [0, r_max] with negligible mass beyond.
    Returns (lhs, rhs); the inequality asserts lhs <= rhs.
    """
    if n < 3:
        raise ValueError("dimension below 3")
    r = np.linspace(0.0, r_max, num)[1:]
    area = sphere_area(n)
    uu = np.abs(np.asarray(u(r))) ** 2
    dd = np.abs(np.asarray(du(r))) ** 2
    lhs = area * np.trapezoid(uu * r ** (n - 3), r)
    rhs = (2.0 / (n - 2)) ** 2 * area * np.trapezoid(dd * r ** (n - 1), r)
    return float(lhs), float(rhs)
