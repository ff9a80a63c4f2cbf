"""Phase space, Hamiltonian, momentum map and derivative machinery for
point vortices on the unit sphere.

Positions live on S^2 in R^3.  Two local charts are used: ring vortices
carry co-latitude/longitude (theta, phi), polar vortices carry the
tangent-plane chart (x, y) with z = sign * sqrt(1 - x^2 - y^2).  All
derivative computations are analytic (chain rule through the chart
embedding); central finite differences serve as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "COINCIDENCE_TOL",
    "CHART_SINGULARITY_TOL",
    "CoincidentVortexError",
    "ChartSingularityError",
    "VortexState",
    "SphericalChart",
    "hamiltonian",
    "momentum_map",
    "vector_field",
    "chart_positions",
    "chart_from_positions",
    "chart_hamiltonian",
    "chart_momentum_z",
    "augmented_hamiltonian",
    "grad_augmented",
    "hessian_augmented",
    "momentum_differential",
    "symplectic_matrix",
    "finite_difference_gradient",
    "finite_difference_hessian",
    "finite_difference_check",
    "inverse_sine_squared_sum",
    "cosine_weighted_sine_sum",
]

# Chordal distance below which the logarithm is treated as singular.
COINCIDENCE_TOL = 1e-9
# Ring co-latitudes closer than this to 0 or pi are chart singularities.
CHART_SINGULARITY_TOL = 1e-6


class CoincidentVortexError(ValueError):
    """Two vortices are (numerically) at the same point of the sphere."""


class ChartSingularityError(ValueError):
    """A ring co-latitude is too close to a pole for the (theta, phi) chart."""


@dataclass(frozen=True)
class VortexState:
    """Positions of N vortices on the unit sphere plus their vorticities."""

    positions: np.ndarray  # (N, 3)
    vorticities: np.ndarray  # (N,)

    def __post_init__(self):
        pos = np.ascontiguousarray(np.atleast_2d(self.positions), dtype=float)
        kap = np.ascontiguousarray(np.atleast_1d(self.vorticities), dtype=float)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "vorticities", kap)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must have shape (N, 3)")
        n = pos.shape[0]
        if n < 2:
            raise ValueError("need at least two vortices")
        if kap.shape != (n,):
            raise ValueError("vorticities must have shape (N,)")
        norms = np.linalg.norm(pos, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("positions must lie on the unit sphere")
        if np.any(kap == 0.0):
            raise ValueError("zero vorticities are not allowed")
        d2 = np.sum((pos[:, None, :] - pos[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        if np.min(d2) < COINCIDENCE_TOL**2:
            raise CoincidentVortexError("coincident vortices")
        pos.flags.writeable = False
        kap.flags.writeable = False

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class SphericalChart:
    """Chart coordinates: ring vortices in (theta, phi), poles in (x, y).

    The flat coordinate vector is ring coordinates first (theta, phi per
    vortex, in order), then (x, y) per polar vortex.
    """

    ring_coords: np.ndarray  # (n_ring, 2) columns (theta, phi)
    pole_signs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    pole_coords: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        rc = np.ascontiguousarray(self.ring_coords, dtype=float).reshape(-1, 2)
        ps = np.ascontiguousarray(self.pole_signs, dtype=int).reshape(-1)
        pc = np.ascontiguousarray(self.pole_coords, dtype=float).reshape(-1, 2)
        if ps.shape[0] != pc.shape[0]:
            raise ValueError("pole_signs and pole_coords disagree")
        if ps.size and not np.all(np.abs(ps) == 1):
            raise ValueError("pole signs must be +-1")
        if np.any(np.sum(pc**2, axis=1) >= 1.0):
            raise ValueError("pole chart values must satisfy |(x, y)| < 1")
        for a in (rc, ps, pc):
            a.flags.writeable = False
        object.__setattr__(self, "ring_coords", rc)
        object.__setattr__(self, "pole_signs", ps)
        object.__setattr__(self, "pole_coords", pc)

    @property
    def n_ring(self) -> int:
        return self.ring_coords.shape[0]

    @property
    def n_pole(self) -> int:
        return self.pole_signs.shape[0]

    @property
    def n(self) -> int:
        return self.n_ring + self.n_pole

    def coordinates(self) -> np.ndarray:
        """Flat coordinate vector of length 2N."""
        return np.concatenate([self.ring_coords.ravel(), self.pole_coords.ravel()])

    def with_coordinates(self, q: np.ndarray) -> "SphericalChart":
        q = np.asarray(q, dtype=float)
        nr = self.n_ring
        return SphericalChart(
            ring_coords=q[: 2 * nr].reshape(nr, 2),
            pole_signs=self.pole_signs,
            pole_coords=q[2 * nr :].reshape(-1, 2),
        )

    def check_regular(self):
        th = self.ring_coords[:, 0]
        if np.any(th < CHART_SINGULARITY_TOL) or np.any(th > np.pi - CHART_SINGULARITY_TOL):
            raise ChartSingularityError("ring co-latitude too close to a pole")


def hamiltonian(state: VortexState) -> float:
    """H = -sum_{i<j} k_i k_j ln(|x_i - x_j|^2 / 2)."""
    pos, kap = state.positions, state.vorticities
    g = 1.0 - pos @ pos.T  # |x_i - x_j|^2 / 2 on the unit sphere
    iu = np.triu_indices(state.n, k=1)
    gij = g[iu]
    if np.min(gij) < 0.5 * COINCIDENCE_TOL**2:
        raise CoincidentVortexError("coincident vortices in hamiltonian")
    return float(-np.sum(kap[iu[0]] * kap[iu[1]] * np.log(gij)))


def momentum_map(state: VortexState) -> np.ndarray:
    """Conserved momentum Phi = sum_j k_j x_j (3-vector)."""
    return state.vorticities @ state.positions


def vector_field(state: VortexState) -> np.ndarray:
    """dx_i/dt = sum_{j != i} k_j (x_j x x_i) / (1 - x_i . x_j)."""
    pos, kap = state.positions, state.vorticities
    g = 1.0 - pos @ pos.T
    np.fill_diagonal(g, np.inf)
    if np.min(g) < 0.5 * COINCIDENCE_TOL**2:
        raise CoincidentVortexError("coincident vortices in vector_field")
    cross = np.cross(pos[None, :, :], pos[:, None, :])  # cross[i, j] = x_j x x_i
    w = kap[None, :] / g
    return np.einsum("ij,ijc->ic", w, cross)


# -- chart embedding -------------------------------------------------------

def _embedding(chart: SphericalChart):
    """Positions and first/second chart derivatives of the embedding.

    Returns (P, D1, D2) with P (N, 3), D1 (N, 2, 3) and D2 (N, 2, 2, 3),
    indexed vortex, chart coordinate(s), ambient component.
    """
    nr, npole = chart.n_ring, chart.n_pole
    n = nr + npole
    P = np.empty((n, 3))
    D1 = np.empty((n, 2, 3))
    D2 = np.empty((n, 2, 2, 3))

    th = chart.ring_coords[:, 0]
    ph = chart.ring_coords[:, 1]
    st, ct = np.sin(th), np.cos(th)
    sp, cp = np.sin(ph), np.cos(ph)
    P[:nr, 0] = st * cp
    P[:nr, 1] = st * sp
    P[:nr, 2] = ct
    D1[:nr, 0, 0] = ct * cp
    D1[:nr, 0, 1] = ct * sp
    D1[:nr, 0, 2] = -st
    D1[:nr, 1, 0] = -st * sp
    D1[:nr, 1, 1] = st * cp
    D1[:nr, 1, 2] = 0.0
    D2[:nr, 0, 0, :] = -P[:nr]
    D2[:nr, 0, 1, 0] = -ct * sp
    D2[:nr, 0, 1, 1] = ct * cp
    D2[:nr, 0, 1, 2] = 0.0
    D2[:nr, 1, 0, :] = D2[:nr, 0, 1, :]
    D2[:nr, 1, 1, 0] = -st * cp
    D2[:nr, 1, 1, 1] = -st * sp
    D2[:nr, 1, 1, 2] = 0.0

    if npole:
        x = chart.pole_coords[:, 0]
        y = chart.pole_coords[:, 1]
        s = chart.pole_signs.astype(float)
        w = np.sqrt(1.0 - x**2 - y**2)
        P[nr:, 0] = x
        P[nr:, 1] = y
        P[nr:, 2] = s * w
        D1[nr:] = 0.0
        D1[nr:, 0, 0] = 1.0
        D1[nr:, 0, 2] = -s * x / w
        D1[nr:, 1, 1] = 1.0
        D1[nr:, 1, 2] = -s * y / w
        D2[nr:] = 0.0
        D2[nr:, 0, 0, 2] = -s * (w**2 + x**2) / w**3
        D2[nr:, 0, 1, 2] = -s * x * y / w**3
        D2[nr:, 1, 0, 2] = D2[nr:, 0, 1, 2]
        D2[nr:, 1, 1, 2] = -s * (w**2 + y**2) / w**3
    return P, D1, D2


def chart_positions(chart: SphericalChart) -> np.ndarray:
    """Cartesian positions (N, 3) of a chart configuration."""
    return _embedding(chart)[0]


def chart_from_positions(positions: np.ndarray, n_ring: int,
                         pole_signs=()) -> SphericalChart:
    """Inverse of chart_positions for a known ring/pole layout."""
    pos = np.asarray(positions, dtype=float)
    ring = pos[:n_ring]
    theta = np.arccos(np.clip(ring[:, 2], -1.0, 1.0))
    phi = np.arctan2(ring[:, 1], ring[:, 0])
    poles = pos[n_ring:]
    return SphericalChart(
        ring_coords=np.column_stack([theta, phi]),
        pole_signs=np.asarray(pole_signs, dtype=int),
        pole_coords=poles[:, :2].copy(),
    )


def chart_state(chart: SphericalChart, vorticities: np.ndarray) -> VortexState:
    return VortexState(chart_positions(chart), np.asarray(vorticities, dtype=float))


def chart_hamiltonian(chart: SphericalChart, vorticities: np.ndarray) -> float:
    return hamiltonian(chart_state(chart, vorticities))


def chart_momentum_z(chart: SphericalChart, vorticities: np.ndarray) -> float:
    P = chart_positions(chart)
    return float(np.asarray(vorticities, float) @ P[:, 2])


def augmented_hamiltonian(chart: SphericalChart, xi: float,
                          vorticities: np.ndarray) -> float:
    """H_xi = H - xi * Phi_z evaluated in chart coordinates."""
    return chart_hamiltonian(chart, vorticities) - xi * chart_momentum_z(chart, vorticities)


def _pair_terms(P, kap):
    g = 1.0 - P @ P.T
    np.fill_diagonal(g, np.inf)
    if np.min(g) < 0.5 * COINCIDENCE_TOL**2:
        raise CoincidentVortexError("coincident vortices")
    kk = np.outer(kap, kap)
    return g, kk


def grad_augmented(chart: SphericalChart, xi: float,
                   vorticities: np.ndarray) -> np.ndarray:
    """Analytic gradient of H_xi in flat chart coordinates (length 2N)."""
    chart.check_regular()
    kap = np.asarray(vorticities, dtype=float)
    P, D1, D2 = _embedding(chart)
    g, kk = _pair_terms(P, kap)
    # T[a, b, i] = d(u_a)/dq_{a,i} . u_b
    T = np.einsum("aic,bc->abi", D1, P)
    grad = np.einsum("ab,ab,abi->ai", kk, 1.0 / g, T)
    grad -= xi * kap[:, None] * D1[:, :, 2]
    return grad.ravel()


def hessian_augmented(chart: SphericalChart, xi: float,
                      vorticities: np.ndarray) -> np.ndarray:
    """Analytic Hessian of H_xi in flat chart coordinates (2N x 2N)."""
    chart.check_regular()
    kap = np.asarray(vorticities, dtype=float)
    P, D1, D2 = _embedding(chart)
    g, kk = _pair_terms(P, kap)
    n = P.shape[0]
    T = np.einsum("aic,bc->abi", D1, P)  # du_a/dq_i . u_b
    invg = 1.0 / g
    w1 = kk * invg
    w2 = kk * invg**2

    # cross blocks (a != b): k k [ du_a/dq_i . du_b/dq_j / g
    #                              + (du_a/dq_i . u_b)(u_a . du_b/dq_j) / g^2 ]
    E = np.einsum("aic,bjc->abij", D1, D1)
    cross = w1[:, :, None, None] * E \
        + w2[:, :, None, None] * np.einsum("abi,baj->abij", T, T)

    # diagonal blocks: sum_b k k [ d2u_a/dq_i dq_j . u_b / g
    #                              + (du_a/dq_i . u_b)(du_a/dq_j . u_b) / g^2 ]
    S2 = np.einsum("aijc,bc->abij", D2, P)
    diag = np.einsum("ab,abij->aij", w1, S2) \
        + np.einsum("ab,abi,abj->aij", w2, T, T)
    diag -= xi * kap[:, None, None] * D2[:, :, :, 2]

    H = cross.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n).copy()
    for a in range(n):
        H[2 * a : 2 * a + 2, 2 * a : 2 * a + 2] = diag[a]
    return 0.5 * (H + H.T)


def momentum_differential(chart: SphericalChart,
                          vorticities: np.ndarray) -> np.ndarray:
    """Exact differential of the momentum map: 3 x 2N matrix."""
    kap = np.asarray(vorticities, dtype=float)
    _, D1, _ = _embedding(chart)
    n = chart.n
    return (kap[:, None, None] * D1).reshape(2 * n, 3).T


def symplectic_matrix(chart: SphericalChart, vorticities: np.ndarray) -> np.ndarray:
    """Matrix of omega in flat chart coordinates.

    omega(d theta_i, d phi_i) = k_i sin theta_i for ring vortices and
    omega(d x_j, d y_j) = k_j / z_j for poles (the area-form Jacobian
    of the tangent-plane chart; equal to sign(z_j) k_j at the pole
    itself).
    """
    kap = np.asarray(vorticities, dtype=float)
    n = chart.n
    W = np.zeros((2 * n, 2 * n))
    st = np.sin(chart.ring_coords[:, 0])
    for i in range(chart.n_ring):
        w = kap[i] * st[i]
        W[2 * i, 2 * i + 1] = w
        W[2 * i + 1, 2 * i] = -w
    for j in range(chart.n_pole):
        i = chart.n_ring + j
        r2 = float(chart.pole_coords[j, 0] ** 2 + chart.pole_coords[j, 1] ** 2)
        z = float(chart.pole_signs[j]) * math.sqrt(max(1.0 - r2, 0.0))
        w = kap[i] / z
        W[2 * i, 2 * i + 1] = w
        W[2 * i + 1, 2 * i] = -w
    return W


# -- finite-difference oracles ---------------------------------------------

def finite_difference_gradient(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def finite_difference_hessian(grad, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences of a gradient function; symmetrized."""
    x = np.asarray(x, dtype=float)
    m = x.size
    H = np.empty((m, m))
    for i in range(m):
        e = np.zeros_like(x)
        e[i] = step
        H[i] = (np.asarray(grad(x + e)) - np.asarray(grad(x - e))) / (2.0 * step)
    return 0.5 * (H + H.T)


def finite_difference_check(f, grad, x: np.ndarray, step: float = 1e-5,
                            scale: float = 1.0) -> float:
    """Max relative discrepancy between analytic and central-difference
    gradients.  The denominator is floored at `scale` so that critical
    points are measured on an absolute scale.
    """
    ga = np.asarray(grad(x), dtype=float)
    gf = finite_difference_gradient(f, x, step)
    denom = max(scale, float(np.max(np.abs(gf))))
    return float(np.max(np.abs(ga - gf)) / denom)


# -- trigonometric sum identities used by the closed forms ------------------

def inverse_sine_squared_sum(n: int) -> float:
    """sum_{r=1}^{n-1} 1 / sin^2(pi r / n); equals (n^2 - 1) / 3."""
    r = np.arange(1, n)
    return float(np.sum(1.0 / np.sin(np.pi * r / n) ** 2))


def cosine_weighted_sine_sum(n: int, ell: int) -> float:
    """sum_{j=1}^{n-1} cos(2 pi l j / n) / sin^2(pi j / n);
    equals (n^2 - 1)/3 - 2 l (n - l)."""
    j = np.arange(1, n)
    return float(np.sum(np.cos(2 * np.pi * ell * j / n) / np.sin(np.pi * j / n) ** 2))
