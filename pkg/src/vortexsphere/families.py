"""Construction of the five symmetric relative-equilibrium families.

Families: a single ring, ring + one polar vortex, ring + two polar
vortices, and two rings of n vortices each (aligned or staggered).
Ring vorticities are 1; the second ring's vorticity ratio kappa is
determined by the configuration for the two-ring families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    SphericalChart,
    VortexState,
    chart_positions,
    chart_momentum_z,
    grad_augmented,
    momentum_map,
)

__all__ = [
    "RING",
    "RING_POLE",
    "RING_TWO_POLES",
    "TWO_ALIGNED_RINGS",
    "TWO_STAGGERED_RINGS",
    "FamilySpec",
    "RelativeEquilibrium",
    "TwoRingSolution",
    "DegenerateFamilyError",
    "NoEquilibriumError",
    "build_ring",
    "build_ring_pole",
    "build_ring_two_poles",
    "solve_two_ring_kappa",
    "build_two_rings",
    "momentum_is_zero",
    "two_ring_restricted_derivatives",
]

RING = "ring"
RING_POLE = "ring_pole"
RING_TWO_POLES = "ring_two_poles"
TWO_ALIGNED_RINGS = "two_aligned_rings"
TWO_STAGGERED_RINGS = "two_staggered_rings"

_KINDS = (RING, RING_POLE, RING_TWO_POLES, TWO_ALIGNED_RINGS, TWO_STAGGERED_RINGS)

# Both branches of the vorticity-ratio equation below this (normalized)
# size => the configuration is an equilibrium for every kappa.  Loose
# enough to catch parameters quoted to a few decimal places near a
# degenerate point, tight enough to keep grid-resolution neighbours.
DEGENERACY_TOL = 5e-4


class DegenerateFamilyError(ValueError):
    """Two-ring configuration is a relative equilibrium for every kappa."""


class NoEquilibriumError(ValueError):
    """No vorticity ratio makes the two-ring configuration an equilibrium."""


@dataclass(frozen=True)
class FamilySpec:
    """Parametric description of one symmetric family."""

    kind: str
    n: int
    theta0: float
    theta1: Optional[float] = None
    kappa: Optional[float] = None
    kappa_n: Optional[float] = None
    kappa_s: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0.0 < self.theta0 < math.pi:
            raise ValueError("theta0 must lie in (0, pi)")
        two_ring = self.kind in (TWO_ALIGNED_RINGS, TWO_STAGGERED_RINGS)
        if self.kind in (RING_TWO_POLES,) or two_ring:
            if self.theta0 > math.pi / 2 + 1e-15:
                raise ValueError("theta0 must lie in (0, pi/2] for this family")
        checks = {
            RING: (False, False, False, False),
            RING_POLE: (False, True, False, False),
            RING_TWO_POLES: (False, False, True, True),
            TWO_ALIGNED_RINGS: (True, True, False, False),
            TWO_STAGGERED_RINGS: (True, True, False, False),
        }[self.kind]
        names = ("theta1", "kappa", "kappa_n", "kappa_s")
        values = (self.theta1, self.kappa, self.kappa_n, self.kappa_s)
        for name, value, wanted in zip(names, values, checks):
            if wanted and value is None:
                raise ValueError(f"{self.kind} requires {name}")
            if not wanted and value is not None:
                raise ValueError(f"{self.kind} does not take {name}")
        if self.theta1 is not None and not 0.0 < self.theta1 < math.pi:
            raise ValueError("theta1 must lie in (0, pi)")
        for name in ("kappa", "kappa_n", "kappa_s"):
            v = getattr(self, name)
            if v is not None and v == 0.0:
                raise ValueError(f"{name} must be nonzero")

    # -- layout -------------------------------------------------------------

    @property
    def ring_count(self) -> int:
        return 2 if self.kind in (TWO_ALIGNED_RINGS, TWO_STAGGERED_RINGS) else 1

    @property
    def pole_signs(self) -> tuple:
        if self.kind == RING_POLE:
            return (1,)
        if self.kind == RING_TWO_POLES:
            return (1, -1)
        return ()

    @property
    def n_vortices(self) -> int:
        return self.n * self.ring_count + len(self.pole_signs)

    def ring_offsets(self) -> tuple:
        """Longitude offsets phi_j^0 per ring (0 aligned, pi/n staggered)."""
        if self.kind == TWO_STAGGERED_RINGS:
            return (0.0, math.pi / self.n)
        if self.kind == TWO_ALIGNED_RINGS:
            return (0.0, 0.0)
        return (0.0,)

    def ring_thetas(self) -> tuple:
        if self.ring_count == 2:
            return (self.theta0, self.theta1)
        return (self.theta0,)

    def ring_vorticities(self) -> tuple:
        if self.ring_count == 2:
            return (1.0, self.kappa)
        return (1.0,)

    def vorticities(self) -> np.ndarray:
        out = []
        for kap in self.ring_vorticities():
            out.extend([kap] * self.n)
        if self.kind == RING_POLE:
            out.append(self.kappa)
        elif self.kind == RING_TWO_POLES:
            out.extend([self.kappa_n, self.kappa_s])
        return np.array(out, dtype=float)

    def chart(self) -> SphericalChart:
        """Chart of the symmetric configuration."""
        rows = []
        for theta, offset in zip(self.ring_thetas(), self.ring_offsets()):
            phi = 2.0 * np.pi * np.arange(self.n) / self.n + offset
            rows.append(np.column_stack([np.full(self.n, theta), phi]))
        ring_coords = np.vstack(rows)
        signs = np.array(self.pole_signs, dtype=int)
        return SphericalChart(
            ring_coords=ring_coords,
            pole_signs=signs,
            pole_coords=np.zeros((len(signs), 2)),
        )

    # -- plain-text serialization (CLI config format) ------------------------

    def to_text(self) -> str:
        parts = [f"kind={self.kind}", f"n={self.n}", f"theta0={self.theta0!r}"]
        for name in ("theta1", "kappa", "kappa_n", "kappa_s"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v!r}")
        return " ".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "FamilySpec":
        kwargs = {}
        for token in text.split():
            key, _, value = token.partition("=")
            if key == "kind":
                kwargs[key] = value
            elif key == "n":
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)


@dataclass(frozen=True)
class RelativeEquilibrium:
    """A family configuration together with its angular velocity."""

    spec: FamilySpec
    state: VortexState
    chart: SphericalChart
    xi: float
    mu: np.ndarray
    degenerate: bool = False

    @property
    def vorticities(self) -> np.ndarray:
        return self.state.vorticities

    def residual(self) -> float:
        """Norm of grad H_xi at the configuration (zero at a true RE)."""
        g = grad_augmented(self.chart, self.xi, self.vorticities)
        return float(np.linalg.norm(g))


def _assemble(spec: FamilySpec, xi: float, degenerate: bool = False) -> RelativeEquilibrium:
    chart = spec.chart()
    kap = spec.vorticities()
    state = VortexState(chart_positions(chart), kap)
    return RelativeEquilibrium(
        spec=spec, state=state, chart=chart, xi=float(xi),
        mu=momentum_map(state), degenerate=degenerate,
    )


def build_ring(n: int, theta0: float) -> RelativeEquilibrium:
    """Single ring; xi = (n - 1) cos(theta0) / sin^2(theta0)."""
    spec = FamilySpec(kind=RING, n=n, theta0=theta0)
    xi = (n - 1) * math.cos(theta0) / math.sin(theta0) ** 2
    return _assemble(spec, xi)


def build_ring_pole(n: int, theta0: float, kappa: float) -> RelativeEquilibrium:
    """Ring plus North polar vortex;
    xi = [(n-1) cos t0 + kappa (1 + cos t0)] / sin^2 t0."""
    spec = FamilySpec(kind=RING_POLE, n=n, theta0=theta0, kappa=kappa)
    c = math.cos(theta0)
    xi = ((n - 1) * c + kappa * (1.0 + c)) / math.sin(theta0) ** 2
    return _assemble(spec, xi)


def build_ring_two_poles(n: int, theta0: float, kappa_n: float,
                         kappa_s: float) -> RelativeEquilibrium:
    """Ring in the Northern hemisphere plus both polar vortices."""
    spec = FamilySpec(kind=RING_TWO_POLES, n=n, theta0=theta0,
                      kappa_n=kappa_n, kappa_s=kappa_s)
    c = math.cos(theta0)
    xi = ((n - 1) * c + kappa_n * (1.0 + c) - kappa_s * (1.0 - c)) / math.sin(theta0) ** 2
    return _assemble(spec, xi)


# -- two-ring families -------------------------------------------------------

def two_ring_restricted_derivatives(n: int, x: float, y: float, staggered: bool):
    """Partial derivatives of the restricted Hamiltonian split
    H = H11 + kappa H12 + kappa^2 H22 in x = cos(theta0), y = cos(theta1).

    Returns (dH11_dx, dH12_dx, dH12_dy, dH22_dy).
    """
    sx = math.sqrt(1.0 - x * x)
    sy = math.sqrt(1.0 - y * y)
    offset = math.pi / n if staggered else 0.0
    r = np.arange(n)
    cosd = np.cos(2.0 * np.pi * r / n + offset)
    g = 1.0 - x * y - sx * sy * cosd
    if np.min(g) < 0.5 * 1e-18:
        raise ValueError("coincident rings")
    dg_dx = -y + (x / sx) * sy * cosd
    dg_dy = -x + (y / sy) * sx * cosd
    dH11_dx = n * (n - 1) * x / (1.0 - x * x)
    dH12_dx = float(-n * np.sum(dg_dx / g))
    dH12_dy = float(-n * np.sum(dg_dy / g))
    dH22_dy = n * (n - 1) * y / (1.0 - y * y)
    return dH11_dx, dH12_dx, dH12_dy, dH22_dy


@dataclass(frozen=True)
class TwoRingSolution:
    """Outcome of the vorticity-ratio equation for a two-ring configuration."""

    status: str  # "unique" | "degenerate" | "none"
    kappa: Optional[float] = None
    xi: Optional[float] = None


def solve_two_ring_kappa(n: int, theta0: float, theta1: float,
                         staggered: bool) -> TwoRingSolution:
    """Solve for the second-ring vorticity ratio kappa.

    kappa (dH22/dy - dH12/dx) = dH11/dx - dH12/dy at (cos t0, cos t1).
    Both sides zero => degenerate (any kappa works); only the left side
    zero => no kappa gives a relative equilibrium.
    """
    if not 0.0 < theta0 <= math.pi / 2:
        raise ValueError("theta0 must lie in (0, pi/2]")
    if not 0.0 < theta1 < math.pi:
        raise ValueError("theta1 must lie in (0, pi)")
    if not staggered and abs(theta1 - theta0) < 1e-12:
        raise ValueError("aligned rings at equal co-latitude coincide")
    x, y = math.cos(theta0), math.cos(theta1)
    d11x, d12x, d12y, d22y = two_ring_restricted_derivatives(n, x, y, staggered)
    num = d11x - d12y
    den = d22y - d12x
    scale = max(abs(d11x), abs(d12x), abs(d12y), abs(d22y), 1.0)
    if abs(den) < DEGENERACY_TOL * scale:
        if abs(num) < DEGENERACY_TOL * scale:
            return TwoRingSolution(status="degenerate")
        return TwoRingSolution(status="none")
    kappa = num / den
    xi = (d11x + kappa * d12x) / n
    return TwoRingSolution(status="unique", kappa=kappa, xi=xi)


def build_two_rings(n: int, theta0: float, theta1: float, staggered: bool,
                    kappa: Optional[float] = None) -> RelativeEquilibrium:
    """Two-ring relative equilibrium; kappa solved for unless supplied
    (a supplied kappa is only accepted at a degenerate configuration)."""
    sol = solve_two_ring_kappa(n, theta0, theta1, staggered)
    degenerate = sol.status == "degenerate"
    if sol.status == "none":
        raise NoEquilibriumError("no kappa makes this configuration an equilibrium")
    if degenerate:
        if kappa is None:
            raise DegenerateFamilyError(
                "degenerate configuration: every kappa works; pass one explicitly")
        x, y = math.cos(theta0), math.cos(theta1)
        d11x, d12x, _, _ = two_ring_restricted_derivatives(n, x, y, staggered)
        xi = (d11x + kappa * d12x) / n
    else:
        if kappa is not None and abs(kappa - sol.kappa) > 1e-9 * max(1.0, abs(sol.kappa)):
            raise ValueError("supplied kappa is not the equilibrium value")
        kappa, xi = sol.kappa, sol.xi
    kind = TWO_STAGGERED_RINGS if staggered else TWO_ALIGNED_RINGS
    spec = FamilySpec(kind=kind, n=n, theta0=theta0, theta1=theta1, kappa=kappa)
    return _assemble(spec, xi, degenerate=degenerate)


def momentum_is_zero(re: RelativeEquilibrium, tol: float = 1e-10) -> bool:
    """True iff the configuration's momentum vanishes (|mu_z| < tol).

    Callers must route mu = 0 cases to the reduced-slice path.
    """
    return abs(chart_momentum_z(re.chart, re.vorticities)) < tol
