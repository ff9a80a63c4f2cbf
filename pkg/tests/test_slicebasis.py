"""Symmetry-adapted slice bases: kernel conditions, pairings, blocks."""

import math

import numpy as np
import pytest

from vortexsphere import families as fam
from vortexsphere import slicebasis as sb
from vortexsphere.core import hessian_augmented, symplectic_matrix


def build(spec):
    if spec.kind == fam.RING:
        return fam.build_ring(spec.n, spec.theta0)
    if spec.kind == fam.RING_POLE:
        return fam.build_ring_pole(spec.n, spec.theta0, spec.kappa)
    if spec.kind == fam.RING_TWO_POLES:
        return fam.build_ring_two_poles(spec.n, spec.theta0, spec.kappa_n,
                                        spec.kappa_s)
    return fam.build_two_rings(
        spec.n, spec.theta0, spec.theta1,
        staggered=spec.kind == fam.TWO_STAGGERED_RINGS)


def sample_equilibria():
    out = []
    for n in (2, 3, 4, 5, 6, 7):
        out.append(fam.build_ring(n, 0.85))
        out.append(fam.build_ring_pole(n, 1.05, 1.9))
        if n >= 3:
            out.append(fam.build_ring_two_poles(n, 0.65, 1.3, -0.4))
        for staggered in (False, True):
            sol = fam.solve_two_ring_kappa(n, 0.55, 2.1, staggered=staggered)
            if sol.status == "unique":
                out.append(fam.build_two_rings(n, 0.55, 2.1, staggered=staggered))
    return out


# -- mode vectors ------------------------------------------------------------

def test_mode_vector_coefficients():
    spec = fam.FamilySpec(kind=fam.RING, n=4, theta0=1.0)
    m = sb.mode_vector(spec, 0, 1, "theta", "alpha")
    np.testing.assert_allclose(m.vec[0::2], np.cos(2 * np.pi * np.arange(4) / 4),
                               atol=1e-12)
    assert not np.any(m.vec[1::2])


def test_vanishing_modes_rejected():
    spec = fam.FamilySpec(kind=fam.RING, n=4, theta0=1.0)
    with pytest.raises(ValueError):
        sb.mode_vector(spec, 0, 0, "theta", "beta")  # sin(0) = 0
    with pytest.raises(ValueError):
        sb.mode_vector(spec, 0, 2, "phi", "beta")  # sin(pi s) = 0 at ell=n/2


def test_staggered_half_mode_parity_swap():
    # with the pi/n offset the ell = n/2 alpha vector vanishes and beta
    # alternates sign
    spec = fam.FamilySpec(kind=fam.TWO_STAGGERED_RINGS, n=4, theta0=0.5,
                          theta1=1.2, kappa=1.0)
    with pytest.raises(ValueError):
        sb.mode_vector(spec, 1, 2, "theta", "alpha")
    m = sb.mode_vector(spec, 1, 2, "theta", "beta")
    ring1 = m.vec[8::2]
    np.testing.assert_allclose(ring1, [1, -1, 1, -1], atol=1e-12)


def test_mode_vectors_enumeration():
    spec = fam.FamilySpec(kind=fam.RING, n=5, theta0=1.0)
    assert len(sb.mode_vectors(spec, 0)) == 2  # alpha only, both channels
    assert len(sb.mode_vectors(spec, 2)) == 4


# -- slice membership and dimensions -----------------------------------------

EXPECTED_DIM = {
    fam.RING: lambda n: 2 * n - 4,
    fam.RING_POLE: lambda n: 2 * n - 2,
    fam.RING_TWO_POLES: lambda n: 2 * n,
    fam.TWO_ALIGNED_RINGS: lambda n: 4 * n - 4,
    fam.TWO_STAGGERED_RINGS: lambda n: 4 * n - 4,
}


@pytest.mark.parametrize("re", sample_equilibria(),
                         ids=lambda r: f"{r.spec.kind}-n{r.spec.n}")
def test_basis_spans_the_slice(re):
    spec = re.spec
    basis = sb.slice_basis(spec)
    assert basis.dim == EXPECTED_DIM[spec.kind](spec.n)
    if basis.dim == 0:
        return
    # in the kernel of the momentum differential
    dP = sb.d_momentum(spec)
    assert np.max(np.abs(dP @ basis.vectors)) < 1e-10
    # omega-orthogonal to the rotation orbit
    omega = symplectic_matrix(spec.chart(), spec.vorticities())
    for t in sb.orbit_tangent(spec, re.mu):
        assert np.max(np.abs(t @ omega @ basis.vectors)) < 1e-10
    # linearly independent
    assert np.linalg.matrix_rank(basis.vectors) == basis.dim


@pytest.mark.parametrize("re", sample_equilibria(),
                         ids=lambda r: f"{r.spec.kind}-n{r.spec.n}")
def test_declared_blocks_decouple(re):
    spec = re.spec
    basis = sb.slice_basis(spec)
    if basis.dim == 0:
        return
    H = hessian_augmented(spec.chart(), re.xi, spec.vorticities())
    Hs = basis.vectors.T @ H @ basis.vectors
    scale = np.max(np.abs(Hs))
    labels = list(basis.block_indices())
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            ia, ib = labels[a][2], labels[b][2]
            assert np.max(np.abs(Hs[np.ix_(ia, ib)])) < 1e-9 * scale
            assert np.max(np.abs(basis.pairing[np.ix_(ia, ib)])) < 1e-9 * scale


def test_ring_n2_slice_empty():
    basis = sb.slice_basis(fam.FamilySpec(kind=fam.RING, n=2, theta0=0.8))
    assert basis.dim == 0


def test_ring_two_poles_n2_unsupported():
    spec = fam.FamilySpec(kind=fam.RING_TWO_POLES, n=2, theta0=0.8,
                          kappa_n=1.0, kappa_s=1.0)
    with pytest.raises(sb.UnsupportedSliceError):
        sb.slice_basis(spec)


def test_zero_momentum_routed_to_reduced():
    spec = fam.FamilySpec(kind=fam.RING, n=5, theta0=math.pi / 2)
    with pytest.raises(sb.ZeroMomentumError):
        sb.slice_basis(spec)
    red = sb.reduced_slice_basis(spec)
    assert red.dim == 2 * 5 - 6
    assert red.reduced
    dP = sb.d_momentum(spec)
    assert np.max(np.abs(dP @ red.vectors)) < 1e-10
    omega = symplectic_matrix(spec.chart(), spec.vorticities())
    for t in sb.orbit_tangent(spec, np.zeros(3)):
        assert np.max(np.abs(t @ omega @ red.vectors)) < 1e-10


def test_reduced_basis_only_for_single_ring():
    spec = fam.FamilySpec(kind=fam.RING_POLE, n=4, theta0=1.0, kappa=1.0)
    with pytest.raises(sb.UnsupportedSliceError):
        sb.reduced_slice_basis(spec)


def test_equatorial_n3_reduced_slice_trivially_stable():
    spec = fam.FamilySpec(kind=fam.RING, n=3, theta0=math.pi / 2)
    assert sb.reduced_slice_basis(spec).dim == 0


# -- pairing table -----------------------------------------------------------

@pytest.mark.parametrize("n", range(2, 13))
def test_pairing_table_single_ring(n):
    t0 = 0.95
    spec = fam.FamilySpec(kind=fam.RING, n=n, theta0=t0)
    omega = symplectic_matrix(spec.chart(), spec.vorticities())
    for ell in range(n // 2 + 1):
        vecs = {(m.channel, m.parity): m.vec for m in sb.mode_vectors(spec, ell)}
        full = n * math.sin(t0)
        for parity in ("alpha", "beta"):
            key_t, key_p = ("theta", parity), ("phi", parity)
            if key_t not in vecs or key_p not in vecs:
                continue
            got = vecs[key_t] @ omega @ vecs[key_p]
            want = full if ell == 0 or 2 * ell == n else full / 2.0
            assert got == pytest.approx(want, abs=1e-10 * n)


def test_ring_pole_pairing_values():
    # equatorial 3-ring plus pole: the half-pairing n sin(theta0)/2 = 3/2
    # (it couples e1 with e2 in this basis order)
    re = fam.build_ring_pole(3, math.pi / 2, 1.3)
    basis = sb.slice_basis(re.spec)
    assert basis.pairing[0, 1] == pytest.approx(1.5, abs=1e-12)
    # generic latitude: the three mode-1 pairing values
    re2 = fam.build_ring_pole(5, 0.85, 2.1)
    W = sb.slice_basis(re2.spec).pairing
    n, t0, kap = 5, 0.85, 2.1
    c, s = math.cos(t0), math.sin(t0)
    assert W[0, 2] == pytest.approx(
        n * c * s * s - n * n * math.cos(2 * t0) ** 2 / (4 * kap), rel=1e-12)
    assert W[3, 1] == pytest.approx(n * c * s * s, rel=1e-12)
    assert W[0, 1] == pytest.approx(n * s / 2.0, rel=1e-12)
    assert W[3, 2] == pytest.approx(n * s / 2.0, rel=1e-12)


def test_singular_pairing_raises():
    # as kappa -> 0 the momentum weight of the pole vanishes and the
    # e-block pairing degenerates
    spec = fam.FamilySpec(kind=fam.RING_POLE, n=4, theta0=0.9, kappa=1e-14)
    with pytest.raises(sb.SingularPairingError):
        sb.slice_basis(spec)


def test_basis_csv_dump():
    basis = sb.slice_basis(fam.FamilySpec(kind=fam.RING, n=4, theta0=0.8))
    text = basis.to_csv()
    lines = text.strip().split("\n")
    assert lines[0].startswith("coordinate,")
    assert len(lines) == 1 + 2 * 4


# -- e-vector reconstruction -------------------------------------------------

def test_ring_pole_e_vectors_from_stated_coefficients():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = int(rng.integers(3, 9))
        t0 = float(rng.uniform(0.3, math.pi - 0.3))
        kap = float(rng.uniform(0.4, 3.0))
        spec = fam.FamilySpec(kind=fam.RING_POLE, n=n, theta0=t0, kappa=kap)
        c, s = math.cos(t0), math.sin(t0)
        coef = n * math.cos(2 * t0) / (2 * kap)
        e1 = (c * sb.mode_vector(spec, 0, 1, "theta", "beta").vec
              - s * sb.mode_vector(spec, 0, 1, "phi", "alpha").vec
              - coef * sb.pole_tangent(spec, 0, "y"))
        basis = sb.slice_basis(spec)
        np.testing.assert_allclose(basis.vectors[:, 0], e1, atol=1e-12)
        dP = sb.d_momentum(spec)
        assert np.max(np.abs(dP @ e1)) < 1e-10
