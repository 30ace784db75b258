"""Radial grids, repulsive potentials, and decaying weights.

The potential classes carry everything the rest of the lab needs: the
pointwise values V(r) >= 0 (right-limit convention at jumps), the
absolutely continuous part of the radial derivative, a finite list of
downward jump atoms, the repulsivity constant C_V of the defining
measure inequality  dV <= -C_V (1+r)^{-1} V dr,  and a short-range tail
exponent for the wave experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RadialGrid",
    "PotentialSpec",
    "WeightSpec",
    "RepulsivityResult",
    "make_grid",
    "zero_potential",
    "coulomb",
    "yukawa",
    "prototype",
    "tabulated",
    "check_repulsive",
    "repulsive_weight",
    "repulsive_weight_derivative",
]


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform mesh r_j = j*dr, j = 1..N, on (0, R] with R = N*dr.

    n is the ambient spatial dimension (n >= 3; the separated radial
    operators below are not defined for n = 2 because the effective
    inverse-square coefficient would turn attractive).
    """

    n: int
    N: int
    dr: float
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("dimension below 3")
        if self.N < 2:
            raise ValueError("need at least 2 interior points")
        if not self.dr > 0:
            raise ValueError("grid spacing must be positive")
        pts = self.dr * np.arange(1, self.N + 1, dtype=float)
        object.__setattr__(self, "points", pts)

    @property
    def R(self) -> float:
        return self.N * self.dr

    def refined(self, factor: int = 2, grow_domain: bool = True) -> "RadialGrid":
        """Doubled grid; by default R doubles too (dr stays fixed)."""
        if grow_domain:
            return RadialGrid(self.n, factor * self.N, self.dr)
        return RadialGrid(self.n, factor * self.N, self.dr / factor)


def make_grid(n: int, R: float, N: int) -> RadialGrid:
    if not R > 0:
        raise ValueError("truncation radius must be positive")
    return RadialGrid(n=n, N=N, dr=R / N)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """A radial repulsive potential with its bounded-variation data.

    jumps is a tuple of (location, jump) pairs with jump <= 0; the value
    evaluator returns right limits at jump locations.  c_v is validated
    by `check_repulsive` at use sites rather than trusted.
    short_range_exponent is the tail decay rate delta with
    V <= C (1+r)^{-delta} outside the unit ball (math.inf for
    compactly-supported-like tails such as Yukawa).
    """

    kind: str
    g: float = 1.0
    c_v: float = 1.0
    short_range_exponent: float = math.inf
    jumps: tuple = ()
    table_r: tuple = ()
    table_v: tuple = ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("potential evaluated at r <= 0")
        if self.kind == "zero":
            out = np.zeros_like(r)
        elif self.kind == "coulomb":
            out = self.g / r
        elif self.kind == "yukawa":
            out = self.g * np.exp(-r) / r
        elif self.kind == "prototype":
            d = self.short_range_exponent
            out = np.where(r < 1.0, self.g / r, 0.5 * self.g * r ** (-d))
        elif self.kind == "tabulated":
            out = self._table_eval(r)
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        return out if out.shape else float(out)

    def derivative(self, r):
        """Absolutely continuous part of dV/dr (right-limit convention)."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("potential derivative at r <= 0")
        if self.kind == "zero":
            out = np.zeros_like(r)
        elif self.kind == "coulomb":
            out = -self.g / r**2
        elif self.kind == "yukawa":
            out = -self.g * np.exp(-r) * (1.0 + r) / r**2
        elif self.kind == "prototype":
            d = self.short_range_exponent
            out = np.where(r < 1.0, -self.g / r**2, -0.5 * self.g * d * r ** (-d - 1.0))
        elif self.kind == "tabulated":
            out = self._table_slope(r)
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        return out if out.shape else float(out)

    def _table_eval(self, r):
        tr = np.asarray(self.table_r)
        tv = np.asarray(self.table_v)
        # right-continuous piecewise linear; jumps live between duplicate
        # abscissae (location listed once with pre- and post-jump values)
        idx = np.searchsorted(tr, r, side="right")
        idx = np.clip(idx, 1, len(tr) - 1)
        r0, r1 = tr[idx - 1], tr[idx]
        v0, v1 = tv[idx - 1], tv[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(r1 > r0, (r - r0) / np.where(r1 > r0, r1 - r0, 1.0), 1.0)
        return v0 + frac * (v1 - v0)

    def _table_slope(self, r):
        tr = np.asarray(self.table_r)
        tv = np.asarray(self.table_v)
        idx = np.searchsorted(tr, r, side="right")
        idx = np.clip(idx, 1, len(tr) - 1)
        r0, r1 = tr[idx - 1], tr[idx]
        v0, v1 = tv[idx - 1], tv[idx]
        return np.where(r1 > r0, (v1 - v0) / np.where(r1 > r0, r1 - r0, 1.0), 0.0)

    @property
    def label(self) -> str:
        return self.kind


def zero_potential() -> PotentialSpec:
    # C_V = 1 fixed by convention: the repulsivity inequality is vacuous
    # for V = 0, but reports need a definite constant.
    return PotentialSpec(kind="zero", g=0.0, c_v=1.0)


def coulomb(g: float = 1.0) -> PotentialSpec:
    if g <= 0:
        raise ValueError("coupling must be positive")
    return PotentialSpec(kind="coulomb", g=g, c_v=1.0, short_range_exponent=1.0)


def yukawa(g: float = 1.0) -> PotentialSpec:
    if g <= 0:
        raise ValueError("coupling must be positive")
    return PotentialSpec(kind="yukawa", g=g, c_v=1.0, short_range_exponent=math.inf)


def prototype(g: float = 1.0, delta_v: float = 1.0) -> PotentialSpec:
    """g/r inside the unit ball, g r^{-delta_v}/2 outside (downward jump
    of g/2 at r = 1, right-limit convention)."""
    if g <= 0 or delta_v <= 0:
        raise ValueError("coupling and tail exponent must be positive")
    return PotentialSpec(
        kind="prototype",
        g=g,
        c_v=min(1.0, delta_v),
        short_range_exponent=delta_v,
        jumps=((1.0, -0.5 * g),),
    )


def tabulated(r, v, atoms=(), c_v: float = 1.0, short_range_exponent: float = 1.0) -> PotentialSpec:
    """Potential from a two-column (r, V) table plus a list of atoms.

    Jump locations may appear as duplicate abscissae in the table (value
    before / after); the atoms list is the authoritative record of the
    jump sizes and must be nonpositive.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
        raise ValueError("table must be two equal-length columns with >= 2 rows")
    if np.any(np.diff(r) < 0):
        raise ValueError("table abscissae must be nondecreasing")
    if np.any(v < 0):
        raise ValueError("tabulated potential must be nonnegative")
    for loc, jump in atoms:
        if jump > 0:
            raise ValueError(f"upward jump at r = {loc}")
    return PotentialSpec(
        kind="tabulated",
        c_v=c_v,
        short_range_exponent=short_range_exponent,
        jumps=tuple((float(a), float(b)) for a, b in atoms),
        table_r=tuple(map(float, r)),
        table_v=tuple(map(float, v)),
    )


@dataclass(frozen=True)
class RepulsivityResult:
    passed: bool
    witness: float | None = None  # left endpoint of first violating interval
    worst_slack: float = math.inf  # min over intervals of (rhs - increment)

    def __bool__(self) -> bool:
        return self.passed


# midpoint-rule comparisons get this absolute headroom per interval;
# atoms are compared exactly
_MEASURE_TOL = 1e-12


def check_repulsive(p: PotentialSpec, grid: RadialGrid, c_v: float | None = None) -> RepulsivityResult:
    """Discrete check of the repulsivity measure inequality on the grid.

    On each interval (r_j, r_{j+1}] the increment of V (right limits, so
    atoms inside the interval are included) must be at most
    -c_v * integral of (1+r)^{-1} V dr, evaluated by the midpoint rule.
    All atoms must be nonpositive.  Returns the first violating interval
    otherwise.
    """
    if c_v is None:
        c_v = p.c_v
    for loc, jump in p.jumps:
        if jump > 0:
            return RepulsivityResult(False, witness=loc, worst_slack=-jump)
    r = grid.points
    vals = p(r)
    mids = r[:-1] + 0.5 * grid.dr
    vmid = p(mids)
    increments = np.diff(vals)
    rhs = -c_v * grid.dr * vmid / (1.0 + mids)
    slack = rhs - increments
    bad = slack < -_MEASURE_TOL
    if np.any(bad):
        j = int(np.argmax(bad))
        return RepulsivityResult(False, witness=float(r[j]), worst_slack=float(slack[j]))
    return RepulsivityResult(True, worst_slack=float(slack.min()) if len(slack) else math.inf)


def repulsive_weight(r, c_v: float, delta: float):
    """w(r) = 1 - C_V/(C_V+delta) * (1+r)^{-delta}, values in (0, 1]."""
    _check_weight_params(c_v, delta)
    r = np.asarray(r, dtype=float)
    out = 1.0 - (c_v / (c_v + delta)) * (1.0 + r) ** (-delta)
    return out if out.shape else float(out)


def repulsive_weight_derivative(r, c_v: float, delta: float):
    """w'(r) = delta*C_V/(C_V+delta) * (1+r)^{-1-delta} > 0."""
    _check_weight_params(c_v, delta)
    r = np.asarray(r, dtype=float)
    out = (delta * c_v / (c_v + delta)) * (1.0 + r) ** (-1.0 - delta)
    return out if out.shape else float(out)


def _check_weight_params(c_v: float, delta: float):
    if not c_v > 0:
        raise ValueError("repulsivity constant must be positive")
    if not 0 < delta < 1:
        raise ValueError("weight exponent delta must lie in (0, 1)")


@dataclass(frozen=True)
class WeightSpec:
    """Decaying radial weight, either (1+r)^{-s} or (1+r^2)^{-s/2}."""

    s: float
    form: str = "one_plus_r"  # or "bracket"

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("weight exponent must be positive")
        if self.form not in ("one_plus_r", "bracket"):
            raise ValueError(f"unknown weight form {self.form!r}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.form == "one_plus_r":
            out = (1.0 + r) ** (-self.s)
        else:
            out = (1.0 + r * r) ** (-0.5 * self.s)
        return out if out.shape else float(out)
