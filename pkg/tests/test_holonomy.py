from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dressed_hqc.hamiltonians import CellSpec, DriveSpec
from dressed_hqc.holonomy import (
    SingleQubitScenario,
    TwoQubitScenario,
    average_gate_fidelity,
    build_single_qubit_system,
    build_two_qubit_model,
    check_parallel_transport,
    closed_system_average_fidelity,
    cyclic_time,
    cyclicity_defect,
    effective_gate,
    ideal_u1,
    ideal_u2,
    input_angles,
    output_grid,
    process_distance,
    reduced_model_gate,
    rwa_two_qubit_gate,
    simulate_gate_fidelity,
    worker_count,
)
from dressed_hqc.units import ghz, mhz

G0, WC = mhz(300), ghz(6)
angles = st.floats(0.0, 2 * np.pi, allow_nan=False)

# -- ideal gates ----------------------------------------------------------------


@given(angles, angles)
def test_u1_is_unitary_hermitian_involution(theta, phi):
    u = ideal_u1(theta, phi).matrix
    assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
    assert np.allclose(u, u.conj().T, atol=1e-12)
    assert np.allclose(u @ u, np.eye(2), atol=1e-12)
    assert np.linalg.det(u) == pytest.approx(-1.0)


@given(angles, angles, angles)
def test_u1_composition_is_rotation(theta1, theta2, phi):
    product = ideal_u1(theta2, phi).matrix @ ideal_u1(theta1, phi).matrix
    assert np.trace(product) == pytest.approx(2 * np.cos(theta2 - theta1), abs=1e-12)


def test_named_single_qubit_gates():
    hadamard = ideal_u1(np.pi / 4, np.pi).matrix
    assert np.allclose(hadamard @ [1, 0], np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(ideal_u1(np.pi / 2, 0.0).matrix, [[0, 1], [1, 0]], atol=1e-15)


def test_u2_action_on_computational_basis():
    u = ideal_u2().matrix
    basis = np.eye(4)
    assert np.allclose(u @ basis[1], basis[2])
    assert np.allclose(u @ basis[2], basis[1])
    assert np.allclose(u @ basis[3], -basis[3])
    assert np.allclose(u @ u, np.eye(4))


def test_cyclic_times():
    assert cyclic_time("single", mhz(8)) == pytest.approx(62.5)
    assert cyclic_time("two", mhz(6)) == pytest.approx(58.925565, abs=1e-5)
    with pytest.raises(ValueError):
        cyclic_time("three", 1.0)
    with pytest.raises(ValueError):
        cyclic_time("single", 0.0)


def test_process_distance_ignores_global_phase():
    u = ideal_u1(0.3, 1.1).matrix
    assert process_distance(np.exp(0.7j) * u, u) == pytest.approx(0.0, abs=1e-12)
    assert process_distance(np.eye(2), np.array([[0, 1], [1, 0]])) == pytest.approx(1.0)


# -- holonomy conditions -------------------------------------------------------


@given(st.floats(0.05, np.pi - 0.05), angles)
def test_parallel_transport_holds(theta, phi):
    spec = DriveSpec.from_gate(theta, phi, mhz(8), G0, WC)
    report = check_parallel_transport(spec, n_samples=21)
    assert report.max_transport < 1e-10 * spec.Omega
    assert report.cyclicity_defect < 1e-10
    assert report.dark_residual < 1e-12


def test_bright_state_leaves_and_returns():
    spec = DriveSpec.from_gate(np.pi / 4, np.pi, mhz(8), G0, WC)
    tau = cyclic_time("single", spec.Omega)
    assert cyclicity_defect(spec, tau / 2) == pytest.approx(1.0, abs=1e-12)
    assert cyclicity_defect(spec, tau) < 1e-12
    assert cyclicity_defect(spec, tau / 3, "dark") < 1e-12


@given(angles, angles)
def test_effective_propagator_is_u1(theta, phi):
    spec = DriveSpec.from_gate(max(theta, 1e-3), phi, mhz(8), G0, WC)
    assert np.allclose(effective_gate(spec), ideal_u1(spec.theta, phi).matrix, atol=1e-8)


def test_reduced_model_approaches_u1():
    spec = DriveSpec.from_gate(np.pi / 4, np.pi, mhz(2), G0, WC)
    gate = reduced_model_gate(spec, keep_ground_shift=True)
    assert process_distance(gate, ideal_u1(np.pi / 4, np.pi).matrix) < 0.01


# -- models ---------------------------------------------------------------------


def test_single_qubit_system_layout():
    system = build_single_qubit_system(SingleQubitScenario.hadamard())
    assert system.model.space.dims == (3, 5)
    # cavity decay plus two transitions with decay and dephasing each
    assert len(system.model.collapses) == 5
    none = build_single_qubit_system(SingleQubitScenario.hadamard(decoherence=False))
    assert none.model.collapses == ()


def test_two_qubit_model_layout():
    model = build_two_qubit_model(TwoQubitScenario())
    assert model.space.dim == 27
    assert len(model.collapses) == 9
    assert all(rate == pytest.approx(mhz(0.01)) for _, rate in model.collapses)


def test_output_grid_rows():
    out, full = output_grid(62.5, 0.5)
    assert out.size == 126
    assert np.array_equal(out, full)
    out, full = output_grid(62.3, 0.5)
    assert out.size == 125 and full.size == 126 and full[-1] == 62.3
    out, full = output_grid(0.0, 0.5)
    assert out.tolist() == [0.0] and full.tolist() == [0.0]
    with pytest.raises(ValueError):
        output_grid(1.0, 0.0)


def test_input_angles_and_workers(monkeypatch):
    assert input_angles(4) == pytest.approx([0, np.pi / 2, np.pi, 3 * np.pi / 2])
    with pytest.raises(ValueError):
        input_angles(1)
    monkeypatch.setenv("DRESSED_HQC_WORKERS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2


# -- fidelities --------------------------------------------------------------------


def test_fast_gate_without_decoherence_is_accurate():
    scenario = SingleQubitScenario.hadamard(Omega=mhz(4), decoherence=False)
    report = simulate_gate_fidelity(scenario)
    assert report.final_fidelity > 0.99
    assert report.run.fidelity[0] == pytest.approx(0.5)


def test_frame_and_lab_fidelity_agree():
    scenario = SingleQubitScenario.not_gate(Omega=mhz(40), duration=3.0)
    a = simulate_gate_fidelity(scenario, frame=True).final_fidelity
    b = simulate_gate_fidelity(scenario, frame=False).final_fidelity
    assert a == pytest.approx(b, abs=1e-6)


def test_decoherence_lowers_fidelity():
    scenario = SingleQubitScenario.hadamard(Omega=mhz(40))
    clean = simulate_gate_fidelity(SingleQubitScenario.hadamard(Omega=mhz(40), decoherence=False)).final_fidelity
    noisy = simulate_gate_fidelity(
        SingleQubitScenario.hadamard(Omega=mhz(40), kappa=mhz(1), gamma1=mhz(1), gamma2=mhz(1))
    ).final_fidelity
    assert noisy < clean
    assert scenario.gate_time == pytest.approx(12.5)


def test_direct_and_linear_averages_agree():
    scenario = SingleQubitScenario.hadamard(Omega=mhz(40))
    direct = average_gate_fidelity(scenario, n_states=4, method="direct", workers=1)
    linear = average_gate_fidelity(scenario, n_states=4, method="linear")
    assert direct.final_fidelity == pytest.approx(linear.final_fidelity, abs=1e-6)
    assert np.allclose(direct.details["per_state"], linear.details["per_state"], atol=1e-6)
    with pytest.raises(ValueError):
        average_gate_fidelity(scenario, n_states=4, method="guess")


def test_closed_system_average_is_near_one():
    infidelity = 1 - closed_system_average_fidelity(SingleQubitScenario.hadamard(), n_states=100)
    assert 0 < infidelity < 1e-3


def test_two_qubit_state_transfer_without_decoherence():
    report = simulate_gate_fidelity(TwoQubitScenario(decoherence=False))
    assert report.final_fidelity > 0.99
    assert report.run.populations["minus_1"][0] == pytest.approx(1.0)


# -- two-qubit gate in the rotating-wave limit ------------------------------------------


def test_rwa_gate_with_equal_couplings_is_zz_times_u2():
    cell = CellSpec.standard(mhz(6))
    zz = np.diag([1, -1, -1, 1])
    gate = rwa_two_qubit_gate(cell)
    assert np.allclose(gate, zz @ ideal_u2().matrix, atol=1e-10)


def test_rwa_gate_with_opposite_couplings_is_u2():
    cell = CellSpec.standard(mhz(6))
    gate = rwa_two_qubit_gate(replace(cell, T23=-cell.T13))
    assert np.allclose(gate, ideal_u2().matrix, atol=1e-10)
