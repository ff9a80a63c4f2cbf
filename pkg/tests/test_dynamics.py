"""Time integration: conservation, convergence, dynamical witnesses."""

import math

import numpy as np
import pytest

from vortexsphere import dynamics as dyn
from vortexsphere import families as fam
from vortexsphere import stability as st
from vortexsphere.core import (
    CoincidentVortexError,
    VortexState,
    hamiltonian,
    momentum_map,
)


def _random_state(n, seed, kappa=None):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    k = kappa if kappa is not None else rng.uniform(0.5, 2.0, n)
    return VortexState(positions=x, vorticities=np.asarray(k, dtype=float))


# -- basic integrator behavior -----------------------------------------------

def test_integrate_rejects_bad_steps():
    state = _random_state(3, 0)
    with pytest.raises(ValueError):
        dyn.integrate(state, T=-1.0, dt=1e-3)
    with pytest.raises(ValueError):
        dyn.integrate(state, T=1.0, dt=0.0)


def test_trajectory_shapes_and_sampling():
    state = _random_state(4, 1)
    traj = dyn.integrate(state, T=0.1, dt=1e-3, sample_stride=10)
    assert traj.positions.shape == (len(traj.times), 4, 3)
    assert traj.conservation_log.shape == (len(traj.times), 3)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(0.1)
    assert np.allclose(np.diff(traj.times)[:-1], 1e-2)


def test_positions_stay_on_sphere():
    traj = dyn.integrate(_random_state(5, 2), T=0.5, dt=1e-3, sample_stride=50)
    norms = np.linalg.norm(traj.positions, axis=2)
    assert np.max(np.abs(norms - 1.0)) < 1e-14


def test_conservation_over_long_run():
    traj = dyn.integrate(_random_state(4, 3), T=10.0, dt=1e-3,
                         sample_stride=100)
    assert np.max(traj.conservation_log[:, 0]) < 1e-8  # relative energy
    assert np.max(traj.conservation_log[:, 1]) < 1e-8  # momentum norm
    assert np.max(traj.conservation_log[:, 2]) < 1e-9  # sphere violation


def test_antipodal_pair_is_stationary():
    x = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    state = VortexState(positions=x, vorticities=np.array([1.0, 2.0]))
    traj = dyn.integrate(state, T=1.0, dt=1e-2)
    assert np.max(np.abs(traj.positions - x[None])) < 1e-13


def test_collision_raises():
    x = np.array([[0.0, 0.0, 1.0],
                  [math.sin(1e-9), 0.0, math.cos(1e-9)],
                  [1.0, 0.0, 0.0]])
    state = VortexState(positions=x, vorticities=np.ones(3))
    with pytest.raises(CoincidentVortexError):
        dyn.integrate(state, T=0.1, dt=1e-3)


def test_fourth_order_convergence():
    state = _random_state(3, 4)
    ref = dyn.integrate(state, T=0.5, dt=1e-4).positions[-1]
    errs = []
    for dt in (4e-3, 2e-3):
        end = dyn.integrate(state, T=0.5, dt=dt).positions[-1]
        errs.append(np.max(np.linalg.norm(end - ref, axis=1)))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0  # halving dt cuts the error ~16x


# -- symmetries of the flow --------------------------------------------------

def test_frame_equivariance():
    state = _random_state(4, 5)
    rng = np.random.default_rng(6)
    A = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    if np.linalg.det(A) < 0:
        A[:, 0] = -A[:, 0]
    rotated = VortexState(positions=state.positions @ A.T,
                          vorticities=state.vorticities)
    t1 = dyn.integrate(state, T=0.3, dt=1e-3).positions[-1]
    t2 = dyn.integrate(rotated, T=0.3, dt=1e-3).positions[-1]
    assert np.max(np.abs(t2 - t1 @ A.T)) < 1e-9


def test_time_reversal_with_reflection():
    # reflecting y -> -y reverses the flow; running the reflected
    # endpoint forward returns to the reflected start
    state = _random_state(4, 7)
    R = np.diag([1.0, -1.0, 1.0])
    fwd = dyn.integrate(state, T=0.3, dt=1e-3).positions[-1]
    back = dyn.integrate(VortexState(positions=fwd @ R,
                                     vorticities=state.vorticities),
                         T=0.3, dt=1e-3).positions[-1]
    assert np.max(np.abs(back @ R - state.positions)) < 1e-8


# -- relative equilibria rotate rigidly --------------------------------------

@pytest.mark.parametrize("re", [
    fam.build_ring(5, 0.9),
    fam.build_ring_pole(4, 1.2, -0.7),
    fam.build_ring_two_poles(6, 0.8, 1.5, -0.5),
    fam.build_two_rings(3, 0.5, 2.0, staggered=True),
    fam.build_two_rings(4, 0.6, 1.9, staggered=False),
], ids=["ring", "ring_pole", "ring_2poles", "staggered", "aligned"])
def test_rigid_rotation(re):
    dev = dyn.verify_rigid_rotation(re, T=2.0, dt=1e-3)
    assert dev < 1e-8


def test_rigid_rotation_wrong_xi_fails():
    re = fam.build_ring(5, 0.9)
    wrong = fam.RelativeEquilibrium(spec=re.spec, state=re.state,
                                    chart=re.chart, xi=re.xi + 0.3,
                                    mu=re.mu, degenerate=re.degenerate)
    assert dyn.verify_rigid_rotation(wrong, T=1.0, dt=1e-3) > 0.1


# -- perturbation growth witnesses -------------------------------------------

def test_slice_perturbation_amplitude_and_tangency():
    re = fam.build_ring_pole(5, 1.0, 1.2)
    rng = np.random.default_rng(8)
    dx = dyn.slice_perturbation(re, 1e-4, rng)
    assert np.linalg.norm(dx) == pytest.approx(1e-4)
    tang = np.einsum("ix,ix->i", re.state.positions, dx)
    assert np.max(np.abs(tang)) < 1e-18


def test_slice_perturbation_trivial_slice_raises():
    re = fam.build_ring(3, math.pi / 2)
    with pytest.raises(ValueError):
        dyn.slice_perturbation(re, 1e-6, np.random.default_rng(0))


def test_growth_rate_unstable_ring():
    re = fam.build_ring(8, 1.2)
    report = st.classify(re)
    assert report.verdict == st.LINEARLY_UNSTABLE
    rate = st_max = max(b.max_real() for b in report.blocks)
    T = min(5.0, math.log(1e4) / rate)
    measured = dyn.perturbation_growth(re, amplitude=1e-6, T=T, dt=1e-3,
                                       seed=0)
    assert measured > 0.5 * st_max
    assert measured < 1.5 * st_max


def test_growth_rate_stable_ring():
    re = fam.build_ring(4, 0.4)
    assert st.classify(re).verdict == st.LYAPUNOV_STABLE
    measured = dyn.perturbation_growth(re, amplitude=1e-6, T=5.0, dt=1e-3,
                                       seed=1)
    assert abs(measured) < 0.05


def test_growth_rate_stable_ring_pole():
    re = fam.build_ring_pole(4, 1.0, 1.0)
    assert st.classify(re).verdict == st.LYAPUNOV_STABLE
    measured = dyn.perturbation_growth(re, amplitude=1e-6, T=5.0, dt=1e-3,
                                       seed=2)
    assert abs(measured) < 0.05


# -- trajectory serialization ------------------------------------------------

def test_trajectory_csv_schema():
    traj = dyn.integrate(_random_state(3, 9), T=0.02, dt=1e-2)
    lines = traj.to_csv().strip().split("\n")
    header = lines[0].split(",")
    assert header == ["time", "x0", "y0", "z0", "x1", "y1", "z1",
                      "x2", "y2", "z2", "H", "Phi_x", "Phi_y", "Phi_z"]
    assert len(lines) == 1 + len(traj.times)
    row = [float(v) for v in lines[1].split(",")]
    st0 = traj.state(0)
    assert row[10] == pytest.approx(hamiltonian(st0))
    assert row[11:14] == pytest.approx(list(momentum_map(st0)))
