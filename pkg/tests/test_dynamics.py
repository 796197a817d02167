"""Integrator, exact propagation, and the commuting-register closed form."""

import warnings

import numpy as np
import pytest

from helpers import random_density_matrix, random_pure_state, rng_for

from qregsim.bath import cell_limit, exponential_decay, replica_symmetric
from qregsim.dynamics import (
    Trajectory,
    check_state,
    dephasing_solve,
    integrate,
    propagate_exact,
    state_defect_report,
)
from qregsim.errors import (
    DimensionMismatch,
    NotSimultaneouslyDiagonalizable,
    TooLarge,
    TooSmall,
    UnstableStep,
)
from qregsim.liouvillian import Liouvillian, build_liouvillian, canonical_form
from qregsim.observables import fidelity
from qregsim.register import (
    basis_state,
    dephasing_register,
    pair_singlet_state,
    qubit_register,
)

SX_HALF = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _unitary_liouvillian(n: int, epsilon: float = 1.0) -> Liouvillian:
    model = qubit_register(n, epsilon=epsilon)
    return build_liouvillian(model, cell_limit(n, 0.0, 0.0))


# ---------------------------------------------------------------------------
# Trajectory container


def test_trajectory_validates_each_snapshot():
    good = np.eye(2, dtype=complex) / 2.0
    bad = 0.9 * good  # trace 0.9
    with pytest.raises(UnstableStep):
        Trajectory(times=np.array([0.0, 1.0]), states=np.array([good, bad]))


def test_trajectory_shape_checks():
    rho = np.eye(2, dtype=complex) / 2.0
    with pytest.raises(DimensionMismatch):
        Trajectory(times=np.array([0.0, 1.0]), states=np.array([rho]))
    with pytest.raises(DimensionMismatch):
        Trajectory(times=np.array([0.0]), states=rho[None, :, :1])


def test_trajectory_final_and_len():
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    rho1 = np.diag([0.5, 0.5]).astype(complex)
    traj = Trajectory(times=np.array([0.0, 2.0]), states=np.array([rho0, rho1]))
    assert len(traj) == 2
    assert np.array_equal(traj.final, rho1)


def test_check_state_defect_paths():
    dim = 3
    rho = np.eye(dim, dtype=complex) / dim
    check_state(rho)  # must not raise
    rep = state_defect_report(rho)
    assert rep["trace_defect"] <= 1e-12
    assert rep["min_eigenvalue"] >= 1.0 / dim - 1e-12
    assert rep["hermiticity_defect"] == 0.0
    with pytest.raises(UnstableStep, match="trace defect"):
        check_state(1.1 * rho)
    bad_herm = rho.copy()
    bad_herm[0, 1] = 1e-6
    with pytest.raises(UnstableStep, match="hermiticity"):
        check_state(bad_herm)
    neg = np.diag([1.1, -0.1, 0.0]).astype(complex)
    with pytest.raises(UnstableStep, match="eigenvalue"):
        check_state(neg)


# ---------------------------------------------------------------------------
# Fixed-step integration


def test_unitary_eigenstate_is_stationary():
    liouv = _unitary_liouvillian(2)
    psi = basis_state(2, "01")
    traj = integrate(liouv, psi, t_end=5.0, dt=0.01)
    fids = [fidelity(s, psi) for s in traj.states]
    assert min(fids) >= 1.0 - 1e-9


def test_unitary_coherence_phase():
    # A single cell with splitting epsilon: the off-diagonal element picks
    # up e^{-i epsilon t}, so at t = pi it returns with a flipped sign.
    liouv = _unitary_liouvillian(1, epsilon=1.0)
    psi = np.array([1.0, 1.0]) / np.sqrt(2.0)
    traj = integrate(liouv, psi, t_end=np.pi, dt=np.pi / 2000, stride=2000)
    assert traj.final[0, 1] == pytest.approx(-0.5, abs=1e-8)


def test_singlet_stationary_under_replica_bath():
    model = qubit_register(2, epsilon=1.0)
    liouv = build_liouvillian(model, replica_symmetric(2, 0.4, 0.0))
    psi = pair_singlet_state(2)
    traj = integrate(liouv, psi, t_end=5.0, dt=0.01)
    fids = [fidelity(s, psi) for s in traj.states]
    assert min(fids) >= 1.0 - 1e-9


def test_integrate_matches_exact_propagation():
    model = qubit_register(2, epsilon=1.0)
    liouv = build_liouvillian(model, cell_limit(2, 0.1, 0.05))
    psi = basis_state(2, "00")
    traj = integrate(liouv, psi, t_end=10.0, dt=0.005, stride=200)
    for k, t in enumerate(traj.times):
        if t in (1.0, 5.0, 10.0):
            ref = propagate_exact(liouv, psi, t)
            assert np.max(np.abs(traj.states[k] - ref)) < 1e-7


def test_halved_step_agreement():
    rng = rng_for("halved-step")
    model = qubit_register(2, epsilon=1.0)
    liouv = build_liouvillian(model, cell_limit(2, 0.2, 0.1))
    rho0 = random_density_matrix(rng, 4)
    coarse = integrate(liouv, rho0, t_end=2.0, dt=0.02)
    fine = integrate(liouv, rho0, t_end=2.0, dt=0.01)
    assert np.max(np.abs(coarse.final - fine.final)) < 1e-6


def test_metadata_and_grid():
    liouv = _unitary_liouvillian(1)
    psi = basis_state(1, "0")
    traj = integrate(liouv, psi, t_end=2.3, dt=0.1, stride=7)
    md = traj.metadata
    assert md["method"] == "rk4"
    assert md["n_steps"] == 23
    assert md["stride"] == 7
    assert md["dt"] == pytest.approx(0.1)
    assert md["error_estimate"] >= 0.0
    # Snapshots at step 0, 7, 14, 21 and the forced final step 23.
    assert traj.times == pytest.approx([0.0, 0.7, 1.4, 2.1, 2.3])


def test_integrate_zero_time():
    liouv = _unitary_liouvillian(1)
    rho0 = np.diag([0.25, 0.75]).astype(complex)
    traj = integrate(liouv, rho0, t_end=0.0, dt=0.1)
    assert len(traj) == 1
    assert np.array_equal(traj.final, rho0)


def test_integrate_argument_guards():
    liouv = _unitary_liouvillian(1)
    psi = basis_state(1, "0")
    with pytest.raises(TooSmall):
        integrate(liouv, psi, t_end=1.0, dt=0.0)
    with pytest.raises(TooSmall):
        integrate(liouv, psi, t_end=-1.0, dt=0.1)
    with pytest.raises(TooSmall):
        integrate(liouv, psi, t_end=1.0, dt=0.1, stride=0)
    with pytest.raises(DimensionMismatch):
        integrate(liouv, basis_state(2, "00"), t_end=1.0, dt=0.1)


def test_coarse_step_warns():
    model = qubit_register(2, epsilon=1.0)
    liouv = build_liouvillian(model, cell_limit(2, 0.5, 0.0))
    psi = basis_state(2, "01")
    with pytest.warns(RuntimeWarning, match="spectral scale"):
        integrate(liouv, psi, t_end=1.0, dt=0.2)


def test_fine_step_does_not_warn():
    model = qubit_register(2, epsilon=1.0)
    liouv = build_liouvillian(model, cell_limit(2, 0.5, 0.0))
    psi = basis_state(2, "01")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        integrate(liouv, psi, t_end=0.5, dt=0.01)


def test_unstable_step_raises():
    model = dephasing_register(2)
    liouv = build_liouvillian(model, cell_limit(2, 4.0, 4.0))
    psi = np.ones(4, dtype=complex) / 2.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(UnstableStep):
            integrate(liouv, psi, t_end=50.0, dt=5.0)


# ---------------------------------------------------------------------------
# Exact propagation


def test_propagate_exact_zero_time():
    liouv = _unitary_liouvillian(2)
    rng = rng_for("exact-zero")
    rho0 = random_density_matrix(rng, 4)
    out = propagate_exact(liouv, rho0, 0.0)
    assert np.max(np.abs(out - rho0)) < 1e-12


def test_propagate_exact_kernel_state_is_fixed():
    model = qubit_register(2, epsilon=1.0)
    liouv = build_liouvillian(model, replica_symmetric(2, 0.4, 0.0))
    psi = pair_singlet_state(2)
    rho0 = np.outer(psi, psi.conj())
    out = propagate_exact(liouv, rho0, 3.0)
    assert np.max(np.abs(out - rho0)) < 1e-10


def test_propagate_exact_dimension_guard():
    model = qubit_register(7, epsilon=1.0)
    liouv = build_liouvillian(model, cell_limit(7, 0.1, 0.0))
    rho0 = np.zeros((128, 128), dtype=complex)
    rho0[0, 0] = 1.0
    with pytest.raises(TooLarge):
        propagate_exact(liouv, rho0, 1.0)


# ---------------------------------------------------------------------------
# Closed-form solver for commuting cell operators


def test_dephasing_product_state_fidelity():
    # Independent cells, both kernels at gamma: each cell's coherence
    # decays as e^{-gamma t}, so a uniform product state has fidelity
    # ((1 + e^{-gamma t}) / 2)^n.
    gamma, n = 0.3, 2
    model = dephasing_register(n)
    spec = cell_limit(n, gamma, gamma)
    psi = np.ones(2**n, dtype=complex) / np.sqrt(2.0**n)
    times = np.linspace(0.0, 8.0, 9)
    traj = dephasing_solve(model, spec, psi, times)
    for t, state in zip(traj.times, traj.states):
        expected = ((1.0 + np.exp(-gamma * t)) / 2.0) ** n
        assert fidelity(state, psi) == pytest.approx(expected, abs=1e-10)
    assert traj.metadata["method"] == "dephasing"


def test_dephasing_long_time_fidelity_floor():
    gamma, n = 0.3, 3
    model = dephasing_register(n)
    spec = cell_limit(n, gamma, gamma)
    psi = np.ones(2**n, dtype=complex) / np.sqrt(2.0**n)
    traj = dephasing_solve(model, spec, psi, np.array([0.0, 200.0 / gamma]))
    assert fidelity(traj.final, psi) == pytest.approx(2.0**-n, abs=1e-6)


def test_dephasing_diagonal_states_are_fixed():
    rng = rng_for("dephasing-diagonal")
    p = rng.random(8)
    rho0 = np.diag(p / p.sum()).astype(complex)
    model = dephasing_register(3)
    spec = exponential_decay(3, 0.4, 0.2, xi=1.5)
    traj = dephasing_solve(model, spec, rho0, np.array([0.0, 5.0, 50.0]))
    for state in traj.states:
        assert np.max(np.abs(state - rho0)) < 1e-12


def test_dephasing_collective_bath_spares_balanced_coherence():
    # A fully correlated kernel couples only to the summed eigenvalue, so
    # coherence between configurations with equal total weight survives
    # while the up-up / down-down coherence decays.
    gamma = 0.5
    model = dephasing_register(2)
    spec = replica_symmetric(2, gamma, gamma)
    balanced = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    ghz = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    times = np.array([0.0, 2.0])
    traj_b = dephasing_solve(model, spec, balanced, times)
    assert np.max(np.abs(traj_b.final - traj_b.states[0])) < 1e-12
    traj_g = dephasing_solve(model, spec, ghz, times)
    # Sum eigenvalues differ by 2, and both kernels contribute: e^{-4 gamma t}.
    assert abs(traj_g.final[0, 3]) == pytest.approx(
        0.5 * np.exp(-4.0 * gamma * 2.0), abs=1e-12
    )


def test_dephasing_hermitian_frame_change_matches_integrator():
    # A non-diagonal Hermitian cell operator exercises the frame rotation.
    model = dephasing_register(2, cell_op=SX_HALF)
    spec = cell_limit(2, 0.3, 0.1)
    rng = rng_for("dephasing-frame")
    rho0 = random_density_matrix(rng, 4)
    liouv = build_liouvillian(model, spec)
    times = np.array([0.0, 1.0])
    traj = dephasing_solve(model, spec, rho0, times)
    ref = propagate_exact(liouv, rho0, 1.0)
    assert np.max(np.abs(traj.final - ref)) < 1e-9


def test_dephasing_with_bath_phase_shifts():
    # delta_ratio switches on the coherent part of the bath kernel; the
    # closed form must track the resulting level shifts exactly.
    model = dephasing_register(2)
    spec = exponential_decay(2, 0.4, 0.1, xi=2.0, delta_ratio=0.5)
    assert spec.has_lamb_shift
    rng = rng_for("dephasing-lamb")
    rho0 = random_density_matrix(rng, 4)
    liouv = build_liouvillian(model, spec)
    traj = dephasing_solve(model, spec, rho0, np.array([0.0, 0.7]))
    ref = propagate_exact(liouv, rho0, 0.7)
    assert np.max(np.abs(traj.final - ref)) < 1e-9


def test_dephasing_matches_integrator_exponential_bath():
    model = dephasing_register(3)
    spec = exponential_decay(3, 0.3, 0.1, xi=2.0)
    rng = rng_for("dephasing-vs-rk4")
    psi = random_pure_state(rng, 8)
    traj_cf = dephasing_solve(model, spec, psi, np.array([0.0, 1.0]))
    liouv = build_liouvillian(model, spec)
    traj_rk = integrate(liouv, psi, t_end=1.0, dt=0.002, stride=500)
    assert np.max(np.abs(traj_cf.final - traj_rk.final)) < 1e-6


def test_dephasing_rejects_non_normal_cell_op():
    model = qubit_register(2, epsilon=1.0)
    psi = basis_state(2, "00")
    with pytest.raises(NotSimultaneouslyDiagonalizable):
        dephasing_solve(model, cell_limit(2, 0.1, 0.0), psi, np.array([0.0]))


def test_dephasing_argument_guards():
    model = dephasing_register(2)
    psi = np.ones(4, dtype=complex) / 2.0
    with pytest.raises(DimensionMismatch):
        dephasing_solve(model, cell_limit(2, 0.1, 0.1), psi, np.array([]))
    with pytest.raises(DimensionMismatch):
        dephasing_solve(model, cell_limit(3, 0.1, 0.1), psi, np.array([0.0]))


def test_dephasing_purity_never_increases():
    model = dephasing_register(2)
    spec = exponential_decay(2, 0.5, 0.2, xi=1.0)
    psi = np.ones(4, dtype=complex) / 2.0
    times = np.linspace(0.0, 10.0, 60)
    traj = dephasing_solve(model, spec, psi, times)
    purity = [float(np.real(np.trace(s @ s))) for s in traj.states]
    assert all(b <= a + 1e-10 for a, b in zip(purity, purity[1:]))
