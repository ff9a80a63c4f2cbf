"""Symmetry-adapted bases for the symplectic slice.

Tangent vectors are represented in flat chart coordinates (length 2N,
ring (theta, phi) pairs first, then pole (x, y) pairs).  Ring
perturbations are organized into Fourier modes: for ring j with
longitude offset phi_j^0,

    alpha + i beta = sum_s exp(i l (2 pi s / n + phi_j^0)) d(coord)_{j,s}.

The slice basis for each family combines the l = 0, 1 modes and pole
tangents into the configuration-specific vectors that span the
symplectic slice, followed by the unmixed l >= 2 modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import momentum_differential, symplectic_matrix
from .families import (
    RING,
    RING_POLE,
    RING_TWO_POLES,
    TWO_ALIGNED_RINGS,
    TWO_STAGGERED_RINGS,
    FamilySpec,
)

__all__ = [
    "ModeVector",
    "SliceBasis",
    "SingularPairingError",
    "ZeroMomentumError",
    "UnsupportedSliceError",
    "mode_vector",
    "mode_vectors",
    "pole_tangent",
    "d_momentum",
    "orbit_tangent",
    "slice_basis",
    "reduced_slice_basis",
    "restricted_symplectic",
]

# Reciprocal condition number below which the restricted pairing counts
# as singular (the form degenerates as kappa -> 0).
PAIRING_RCOND = 1e-10

_COEFF_ZERO = 1e-12


class SingularPairingError(RuntimeError):
    """The restricted symplectic pairing is (numerically) singular."""


class ZeroMomentumError(ValueError):
    """The configuration has zero momentum; use the reduced slice."""


class UnsupportedSliceError(NotImplementedError):
    """No symmetry-adapted basis is available for this configuration."""


@dataclass(frozen=True)
class ModeVector:
    """One Fourier-mode tangent vector of a ring."""

    ring: int
    ell: int
    channel: str  # "theta" | "phi"
    parity: str  # "alpha" | "beta"
    vec: np.ndarray  # flat chart coordinates, length 2N


def _mode_coeffs(spec: FamilySpec, ring: int, ell: int, parity: str) -> np.ndarray:
    n = spec.n
    offset = spec.ring_offsets()[ring]
    phase = ell * (2.0 * np.pi * np.arange(n) / n + offset)
    c = np.cos(phase) if parity == "alpha" else np.sin(phase)
    c[np.abs(c) < _COEFF_ZERO] = 0.0
    return c


def mode_vector(spec: FamilySpec, ring: int, ell: int, channel: str,
                parity: str) -> ModeVector:
    """Build one mode vector; raises if it is identically zero."""
    if channel not in ("theta", "phi"):
        raise ValueError("channel must be 'theta' or 'phi'")
    if parity not in ("alpha", "beta"):
        raise ValueError("parity must be 'alpha' or 'beta'")
    if not 0 <= ell < spec.n:
        raise ValueError("mode index out of range")
    c = _mode_coeffs(spec, ring, ell, parity)
    if not np.any(c):
        raise ValueError(
            f"{parity}({ell}) vanishes identically for this ring")
    vec = np.zeros(2 * spec.n_vortices)
    base = ring * spec.n
    off = 0 if channel == "theta" else 1
    vec[2 * base + off : 2 * (base + spec.n) : 2] = c
    return ModeVector(ring=ring, ell=ell, channel=channel, parity=parity, vec=vec)


def _mv(spec, ring, ell, channel, parity) -> np.ndarray:
    """Mode-vector coordinates, or the zero vector when it vanishes."""
    c = _mode_coeffs(spec, ring, ell, parity)
    vec = np.zeros(2 * spec.n_vortices)
    base = ring * spec.n
    off = 0 if channel == "theta" else 1
    vec[2 * base + off : 2 * (base + spec.n) : 2] = c
    return vec


def mode_vectors(spec: FamilySpec, ell: int) -> List[ModeVector]:
    """All non-vanishing alpha/beta mode vectors at mode ell."""
    out = []
    for ring in range(spec.ring_count):
        for channel in ("theta", "phi"):
            for parity in ("alpha", "beta"):
                try:
                    out.append(mode_vector(spec, ring, ell, channel, parity))
                except ValueError:
                    pass
    return out


def pole_tangent(spec: FamilySpec, pole: int, channel: str) -> np.ndarray:
    """delta x or delta y of a polar vortex, in flat coordinates."""
    vec = np.zeros(2 * spec.n_vortices)
    idx = spec.ring_count * spec.n + pole
    vec[2 * idx + (0 if channel == "x" else 1)] = 1.0
    return vec


def d_momentum(spec: FamilySpec) -> np.ndarray:
    """Differential of the momentum map at the symmetric configuration
    (3 x 2N)."""
    return momentum_differential(spec.chart(), spec.vorticities())


def orbit_tangent(spec: FamilySpec, mu: np.ndarray) -> List[np.ndarray]:
    """Generators of the momentum-isotropy orbit tangent space.

    One generator (rotation about z) when mu != 0; three when mu = 0.
    """
    gen_z = sum(_mv(spec, j, 0, "phi", "alpha") for j in range(spec.ring_count))
    if np.linalg.norm(np.asarray(mu)) > 1e-10:
        return [gen_z]
    vre = np.zeros(2 * spec.n_vortices)
    vim = np.zeros(2 * spec.n_vortices)
    thetas = spec.ring_thetas()
    for j in range(spec.ring_count):
        cs = np.cos(thetas[j]) * np.sin(thetas[j])
        # real/imaginary parts of i(a_th + i b_th) - cos sin (a_ph + i b_ph)
        vre += -_mv(spec, j, 1, "theta", "beta") - cs * _mv(spec, j, 1, "phi", "alpha")
        vim += _mv(spec, j, 1, "theta", "alpha") - cs * _mv(spec, j, 1, "phi", "beta")
    for p, sign in enumerate(spec.pole_signs):
        vre += -float(sign) * pole_tangent(spec, p, "y")
        vim += float(sign) * pole_tangent(spec, p, "x")
    return [vre, vim, gen_z]


@dataclass(frozen=True)
class SliceBasis:
    """Ordered basis of the symplectic slice with block-layout metadata."""

    vectors: np.ndarray  # (2N, d), columns are basis vectors
    blocks: tuple  # of (label, ell or None, index tuple)
    pairing: np.ndarray  # d x d matrix of omega restricted to the basis
    reduced: bool = False

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def block_indices(self):
        for label, ell, idx in self.blocks:
            yield label, ell, np.asarray(idx, dtype=int)

    def to_csv(self) -> str:
        """Labeled dump of the basis vectors (rows: coordinates)."""
        lines = []
        labels = []
        for label, _, idx in self.blocks:
            labels.extend(f"{label}[{k}]" for k in range(len(idx)))
        lines.append("coordinate," + ",".join(labels))
        for row in range(self.vectors.shape[0]):
            vals = ",".join(repr(v) for v in self.vectors[row])
            lines.append(f"q{row},{vals}")
        return "\n".join(lines) + "\n"


def restricted_symplectic(vectors: np.ndarray, spec: FamilySpec,
                          blocks=None) -> np.ndarray:
    """Matrix of omega restricted to the given basis vectors.

    Raises SingularPairingError when any declared block (or the whole
    matrix) has reciprocal condition number below PAIRING_RCOND.
    """
    omega = symplectic_matrix(spec.chart(), spec.vorticities())
    W = vectors.T @ omega @ vectors
    W = 0.5 * (W - W.T)
    groups = [np.asarray(idx, dtype=int) for _, _, idx in blocks] if blocks \
        else ([np.arange(W.shape[0])] if W.shape[0] else [])
    for idx in groups:
        sub = W[np.ix_(idx, idx)]
        sv = np.linalg.svd(sub, compute_uv=False)
        if sv.size and (sv[-1] == 0.0 or sv[-1] / sv[0] < PAIRING_RCOND):
            raise SingularPairingError("restricted symplectic form is singular")
    return W


def _star_mode_blocks(spec: FamilySpec, start: int):
    """The l = 2..[n/2] mode vectors of a single ring, with the even-n
    truncation at n/2, plus their block layout."""
    n = spec.n
    cols: List[np.ndarray] = []
    blocks = []
    for ell in range(2, n // 2 + 1):
        if n % 2 == 0 and ell == n // 2:
            cols += [_mv(spec, 0, ell, "theta", "alpha"),
                     _mv(spec, 0, ell, "phi", "alpha")]
            blocks.append((f"l={ell}", ell,
                           tuple(range(start + len(cols) - 2, start + len(cols)))))
        else:
            cols += [_mv(spec, 0, ell, "theta", "alpha"),
                     _mv(spec, 0, ell, "phi", "alpha")]
            blocks.append((f"l={ell}a", ell,
                           tuple(range(start + len(cols) - 2, start + len(cols)))))
            cols += [_mv(spec, 0, ell, "theta", "beta"),
                     _mv(spec, 0, ell, "phi", "beta")]
            blocks.append((f"l={ell}b", ell,
                           tuple(range(start + len(cols) - 2, start + len(cols)))))
    return cols, blocks


def _ring_basis(spec: FamilySpec):
    n = spec.n
    if n == 2:
        return [], []
    st, ct = np.sin(spec.theta0), np.cos(spec.theta0)
    e1 = st * _mv(spec, 0, 1, "theta", "alpha") + ct * _mv(spec, 0, 1, "phi", "beta")
    e2 = st * _mv(spec, 0, 1, "theta", "beta") - ct * _mv(spec, 0, 1, "phi", "alpha")
    cols = [e1, e2]
    blocks = [("e", 1, (0, 1))]
    mode_cols, mode_blocks = _star_mode_blocks(spec, start=2)
    return cols + mode_cols, blocks + mode_blocks


def _ring_pole_basis(spec: FamilySpec):
    n = spec.n
    kap = spec.kappa
    st, ct = np.sin(spec.theta0), np.cos(spec.theta0)
    if n == 2:
        dth = _mv(spec, 0, 1, "theta", "alpha")  # d theta_0 - d theta_1
        dph = _mv(spec, 0, 1, "phi", "alpha")
        v1 = kap * dth - 2.0 * ct * pole_tangent(spec, 0, "x")
        v2 = kap * dph - 2.0 * st * pole_tangent(spec, 0, "y")
        return [v1, v2], [("e", 1, (0, 1))]
    c2 = np.cos(2.0 * spec.theta0)
    pole_coef = n * c2 / (2.0 * kap)
    e1 = ct * _mv(spec, 0, 1, "theta", "beta") - st * _mv(spec, 0, 1, "phi", "alpha") \
        - pole_coef * pole_tangent(spec, 0, "y")
    e2 = st * _mv(spec, 0, 1, "theta", "alpha") + ct * _mv(spec, 0, 1, "phi", "beta")
    e3 = ct * _mv(spec, 0, 1, "theta", "alpha") + st * _mv(spec, 0, 1, "phi", "beta") \
        - pole_coef * pole_tangent(spec, 0, "x")
    e4 = st * _mv(spec, 0, 1, "theta", "beta") - ct * _mv(spec, 0, 1, "phi", "alpha")
    cols = [e1, e2, e3, e4]
    blocks = [("e", 1, (0, 1, 2, 3))]
    mode_cols, mode_blocks = _star_mode_blocks(spec, start=4)
    return cols + mode_cols, blocks + mode_blocks


def _ring_two_poles_basis(spec: FamilySpec):
    n = spec.n
    if n == 2:
        raise UnsupportedSliceError(
            "no symmetry-adapted basis for a 2-ring with two poles")
    st, ct = np.sin(spec.theta0), np.cos(spec.theta0)
    c2 = np.cos(2.0 * spec.theta0)
    ath = _mv(spec, 0, 1, "theta", "alpha")
    bth = _mv(spec, 0, 1, "theta", "beta")
    aph = _mv(spec, 0, 1, "phi", "alpha")
    bph = _mv(spec, 0, 1, "phi", "beta")
    cN = n * c2 / (2.0 * spec.kappa_n)
    cS = n * c2 / (2.0 * spec.kappa_s)
    e1 = ct * bth - st * aph - cN * pole_tangent(spec, 0, "y")
    e2 = ct * bth - st * aph - cS * pole_tangent(spec, 1, "y")
    e3 = st * ath + ct * bph
    e4 = ct * ath + st * bph - cN * pole_tangent(spec, 0, "x")
    e5 = ct * ath + st * bph - cS * pole_tangent(spec, 1, "x")
    e6 = st * bth - ct * aph
    cols = [e1, e2, e3, e4, e5, e6]
    blocks = [("e", 1, tuple(range(6)))]
    mode_cols, mode_blocks = _star_mode_blocks(spec, start=6)
    return cols + mode_cols, blocks + mode_blocks


def _two_ring_e_vectors(spec: FamilySpec):
    kap = spec.kappa
    s0, c0 = np.sin(spec.theta0), np.cos(spec.theta0)
    s1, c1 = np.sin(spec.theta1), np.cos(spec.theta1)

    def mv(ring, ell, channel, parity):
        return _mv(spec, ring, ell, channel, parity)

    e1 = mv(0, 0, "phi", "alpha") - mv(1, 0, "phi", "alpha")
    e2 = kap * s1 * mv(0, 0, "theta", "alpha") - s0 * mv(1, 0, "theta", "alpha")
    e3 = s0 * s1 * (kap * c1 * mv(0, 1, "theta", "alpha") + c0 * mv(1, 1, "theta", "alpha")) \
        + c0 * c1 * (kap * s1 * mv(0, 1, "phi", "beta") + s0 * mv(1, 1, "phi", "beta"))
    e4 = kap * c1 * mv(0, 1, "theta", "alpha") - c0 * mv(1, 1, "theta", "alpha")
    e5 = kap * s1 * mv(0, 1, "phi", "beta") - s0 * mv(1, 1, "phi", "beta")
    e6 = s0 * s1 * (kap * c1 * mv(0, 1, "theta", "beta") + c0 * mv(1, 1, "theta", "beta")) \
        - c0 * c1 * (kap * s1 * mv(0, 1, "phi", "alpha") + s0 * mv(1, 1, "phi", "alpha"))
    e7 = kap * c1 * mv(0, 1, "theta", "beta") - c0 * mv(1, 1, "theta", "beta")
    e8 = kap * s1 * mv(0, 1, "phi", "alpha") - s0 * mv(1, 1, "phi", "alpha")
    return [e1, e2, e3, e4, e5, e6, e7, e8]


def _two_ring_basis(spec: FamilySpec):
    n = spec.n
    staggered = spec.kind == TWO_STAGGERED_RINGS
    e = _two_ring_e_vectors(spec)

    def mv(ring, ell, channel, parity):
        return _mv(spec, ring, ell, channel, parity)

    if n == 2:
        cols = [e[0], e[1], e[2], e[5]] if staggered else [e[0], e[1], e[3], e[7]]
        return cols, [("e0", 0, (0, 1)), ("e1", 1, (2, 3))]

    cols = list(e)
    blocks = [("e0", 0, (0, 1)), ("e1", 1, tuple(range(2, 8)))]
    top = (n - 1) // 2
    for ell in range(2, top + 1):
        start = len(cols)
        cols += [
            mv(0, ell, "theta", "alpha") - mv(1, ell, "theta", "alpha"),
            mv(0, ell, "phi", "beta") + mv(1, ell, "phi", "beta"),
            mv(0, ell, "phi", "alpha") + mv(1, ell, "phi", "alpha"),
            mv(0, ell, "theta", "beta") - mv(1, ell, "theta", "beta"),
            mv(0, ell, "theta", "alpha") + mv(1, ell, "theta", "alpha"),
            mv(0, ell, "phi", "beta") - mv(1, ell, "phi", "beta"),
            mv(0, ell, "phi", "alpha") - mv(1, ell, "phi", "alpha"),
            mv(0, ell, "theta", "beta") + mv(1, ell, "theta", "beta"),
        ]
        blocks.append((f"l={ell}", ell, tuple(range(start, start + 8))))
    if n % 2 == 0:
        half = n // 2
        start = len(cols)
        if staggered:
            cols += [
                mv(0, half, "theta", "alpha") - mv(1, half, "theta", "alpha"),
                mv(0, half, "phi", "alpha") - mv(1, half, "phi", "alpha"),
                mv(1, half, "theta", "beta"),
                mv(1, half, "phi", "beta"),
            ]
        else:
            cols += [
                mv(0, half, "theta", "alpha"),
                mv(1, half, "theta", "alpha"),
                mv(0, half, "phi", "alpha"),
                mv(1, half, "phi", "alpha"),
            ]
        blocks.append((f"l={half}", half, tuple(range(start, start + 4))))
    return cols, blocks


def _finish(spec: FamilySpec, cols, blocks, reduced=False) -> SliceBasis:
    if cols:
        B = np.column_stack(cols)
    else:
        B = np.zeros((2 * spec.n_vortices, 0))
    W = restricted_symplectic(B, spec, blocks=blocks)
    return SliceBasis(vectors=B, blocks=tuple(blocks), pairing=W, reduced=reduced)


def slice_basis(spec: FamilySpec) -> SliceBasis:
    """Symmetry-adapted basis of the symplectic slice (mu != 0)."""
    from .core import chart_momentum_z  # local import to avoid cycle noise

    if abs(chart_momentum_z(spec.chart(), spec.vorticities())) < 1e-10:
        raise ZeroMomentumError(
            "zero momentum: use reduced_slice_basis")
    if spec.kind == RING:
        cols, blocks = _ring_basis(spec)
    elif spec.kind == RING_POLE:
        cols, blocks = _ring_pole_basis(spec)
    elif spec.kind == RING_TWO_POLES:
        cols, blocks = _ring_two_poles_basis(spec)
    else:
        cols, blocks = _two_ring_basis(spec)
    return _finish(spec, cols, blocks)


def reduced_slice_basis(spec: FamilySpec) -> SliceBasis:
    """Slice basis for zero-momentum configurations.

    Only the single-ring family is supported (the equatorial ring): the
    l = 0, 1 combinations are absorbed by the larger SO(3) isotropy and
    only the l >= 2 modes remain.
    """
    if spec.kind != RING:
        raise UnsupportedSliceError(
            "reduced slice bases are only available for the single ring")
    cols, blocks = _star_mode_blocks(spec, start=0)
    return _finish(spec, cols, blocks, reduced=True)
