"""Separated radial operators per spherical-harmonic sector.

build_sector discretizes  T = -h^2 d^2/dr^2 + h^2 nu/r^2 + V(r)  with
second-order central differences and Dirichlet conditions at r = 0 and
r = R, acting on the conjugated function v = r^{(n-1)/2} u.  The
centrifugal coefficient nu = l(l+n-2) + (n-1)(n-3)/4 is nonnegative for
n >= 3, so T is positive definite.

Shifted systems (T - z) are complex tridiagonal; they are factored once
(LU with partial pivoting, see `kernels`) and reused across solves.
Because T is real symmetric, the adjoint resolvent is the solve at the
conjugate shift, which reuses the same factorization via conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import kernels
from .model import PotentialSpec, RadialGrid

__all__ = [
    "SectorOperator",
    "SpectralData",
    "ShiftedSystem",
    "SingularShiftError",
    "centrifugal_coefficient",
    "build_sector",
    "solve_shifted",
    "adjoint_solve",
    "relative_residual",
    "eigendecompose",
]


class SingularShiftError(ArithmeticError):
    """Pivot breakdown: the shift z is numerically on the spectrum."""


def centrifugal_coefficient(n: int, ell: int) -> float:
    """nu_l = l(l+n-2) + (n-1)(n-3)/4, the sector eigenvalue of the
    angular operator (nonnegative for n >= 3)."""
    if n < 3:
        raise ValueError("dimension below 3")
    if ell < 0:
        raise ValueError("angular momentum index must be >= 0")
    return ell * (ell + n - 2) + (n - 1) * (n - 3) / 4.0


@dataclass(frozen=True, eq=False)
class SectorOperator:
    """Real symmetric tridiagonal sector matrix: constant off-diagonal
    -h^2/dr^2 and main diagonal 2h^2/dr^2 + h^2 nu/r_j^2 + V(r_j)."""

    grid: RadialGrid
    h: float
    ell: int
    nu: float
    diag: np.ndarray = field(repr=False)
    off: float

    @property
    def N(self) -> int:
        return self.grid.N

    def dense(self) -> np.ndarray:
        M = np.diag(self.diag).astype(float)
        idx = np.arange(self.N - 1)
        M[idx, idx + 1] = self.off
        M[idx + 1, idx] = self.off
        return M

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        return y

    def scale_norm(self) -> float:
        """Infinity-norm style magnitude used for residual scaling."""
        return float(np.max(np.abs(self.diag)) + 2 * abs(self.off))


def build_sector(grid: RadialGrid, p: PotentialSpec, h: float, ell: int) -> SectorOperator:
    if not h > 0:
        raise ValueError("semiclassical parameter must be positive")
    nu = centrifugal_coefficient(grid.n, ell)
    r = grid.points
    k = h * h / grid.dr**2
    diag = 2.0 * k + h * h * nu / r**2 + p(r)
    return SectorOperator(grid=grid, h=h, ell=ell, nu=nu, diag=diag, off=-k)


class ShiftedSystem:
    """Factored (T - z); solves and adjoint solves share the factorization."""

    def __init__(self, T: SectorOperator, z: complex):
        self.T = T
        self.z = complex(z)
        n = T.N
        d = T.diag.astype(np.complex128) - self.z
        dl = np.full(n - 1, T.off, dtype=np.complex128)
        du = np.full(n - 1, T.off, dtype=np.complex128)
        try:
            self._fac = kernels.factor(dl, d, du)
        except ZeroDivisionError as exc:
            raise SingularShiftError(str(exc)) from exc

    def solve(self, f: np.ndarray) -> np.ndarray:
        """u with (T - z) u = f."""
        return kernels.solve(*self._fac, np.ascontiguousarray(f, dtype=np.complex128))

    def solve_adjoint(self, g: np.ndarray) -> np.ndarray:
        """u with (T - conj(z)) u = g, i.e. ((T-z)^{-1})^* g.

        T - conj(z) is the entrywise conjugate of T - z, so the one
        factorization serves both directions.
        """
        g = np.ascontiguousarray(g, dtype=np.complex128)
        return np.conj(kernels.solve(*self._fac, np.conj(g)))


def solve_shifted(T: SectorOperator, z: complex, f: np.ndarray) -> np.ndarray:
    return ShiftedSystem(T, z).solve(f)


def adjoint_solve(T: SectorOperator, z: complex, g: np.ndarray) -> np.ndarray:
    return ShiftedSystem(T, z).solve_adjoint(g)


def relative_residual(T: SectorOperator, z: complex, u: np.ndarray, f: np.ndarray) -> float:
    """Backward-error style residual ||(T-z)u - f|| / (||T-z|| ||u|| + ||f||)."""
    r = T.matvec(u) - z * u - f
    scale = (T.scale_norm() + abs(z)) * np.linalg.norm(u) + np.linalg.norm(f)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(r) / scale)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Full eigendecomposition of a sector operator: ascending positive
    eigenvalues and the orthonormal eigenvector table Q (columns)."""

    eigenvalues: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)


def eigendecompose(T: SectorOperator) -> SpectralData:
    lam, Q = eigh_tridiagonal(T.diag, np.full(T.N - 1, T.off))
    return SpectralData(eigenvalues=lam, Q=Q)
