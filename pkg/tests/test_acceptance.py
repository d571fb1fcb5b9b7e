"""Acceptance criteria, each evaluated at its stated tolerance.

Every criterion prints one ``CRITERION n ... PASS|FAIL`` line. Run with
``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import sys

import numpy as np
import pytest

from dressed_hqc.circuit import DeviceSpec, derive_cell_params, scaling_check
from dressed_hqc.dynamics import LindbladModel, evolve_superoperator, propagate_lindblad, trace_distance
from dressed_hqc.hamiltonians import (
    CellSpec,
    DriveSpec,
    TimeDependentHamiltonian,
    build_cell_ac,
    build_heff1,
    pair_transition_gaps,
)
from dressed_hqc.holonomy import (
    SingleQubitScenario,
    TwoQubitScenario,
    average_gate_fidelity,
    build_single_qubit_system,
    check_parallel_transport,
    ideal_u1,
    ideal_u2,
    rwa_convergence,
    simulate_gate_fidelity,
)
from dressed_hqc.operators import DensityMatrix, HilbertSpace, OperatorMatrix, annihilation
from dressed_hqc.units import TWO_PI, mhz, to_ghz, to_mhz

SEED = 20240611


def _line(number, title, passed, detail):
    return f"CRITERION {number} [{title}]: {'PASS' if passed else 'FAIL'} ({detail})"


# ---------------------------------------------------------------------------
# Criteria; each returns (passed, detail)


def criterion_1():
    f = simulate_gate_fidelity(SingleQubitScenario.hadamard()).final_fidelity
    return abs(f - 0.9971) <= 0.003, f"F_H = {f:.6f}, target 0.9971 +- 0.003"


def criterion_2():
    f = simulate_gate_fidelity(SingleQubitScenario.not_gate()).final_fidelity
    return abs(f - 0.9929) <= 0.003, f"F_N = {f:.6f}, target 0.9929 +- 0.003"


def criterion_3():
    fh = average_gate_fidelity(SingleQubitScenario.hadamard(), n_states=1000).final_fidelity
    fn = average_gate_fidelity(SingleQubitScenario.not_gate(), n_states=1000).final_fidelity
    passed = abs(fh - 0.9949) <= 0.003 and abs(fn - 0.9915) <= 0.003
    return passed, f"F_H^G = {fh:.6f} (0.9949 +- 0.003), F_N^G = {fn:.6f} (0.9915 +- 0.003)"


def criterion_4():
    noisy = simulate_gate_fidelity(TwoQubitScenario()).final_fidelity
    clean = simulate_gate_fidelity(TwoQubitScenario(decoherence=False)).final_fidelity
    passed = abs(noisy - 0.9909) <= 0.005 and clean > noisy
    return passed, f"F_T = {noisy:.6f} (0.9909 +- 0.005), without decoherence {clean:.6f}"


def criterion_5():
    rng = np.random.default_rng(SEED)
    worst_u1 = 0.0
    for theta, phi in rng.uniform(0, 2 * np.pi, size=(1000, 2)):
        u = ideal_u1(theta, phi).matrix
        worst_u1 = max(
            worst_u1,
            np.abs(u @ u - np.eye(2)).max(),
            np.abs(u @ u.conj().T - np.eye(2)).max(),
            abs(np.linalg.det(u) + 1.0),
        )
    u2 = ideal_u2().matrix
    u2_error = np.abs(u2 @ u2 - np.eye(4)).max()
    dark, transport, cyclic = 0.0, 0.0, 0.0
    for theta, phi in rng.uniform(0, 2 * np.pi, size=(50, 2)):
        spec = DriveSpec.from_gate(max(theta, 1e-3), phi, mhz(8), mhz(300), TWO_PI * 6.0)
        lam = build_heff1(spec)
        dark = max(dark, np.linalg.norm(lam.hamiltonian.data @ lam.dark.data) / spec.Omega)
        report = check_parallel_transport(spec, n_samples=101)
        transport = max(transport, report.max_transport / spec.Omega)
        cyclic = max(cyclic, report.cyclicity_defect)
    passed = worst_u1 < 1e-12 and u2_error == 0.0 and dark < 1e-12 and transport < 1e-10 and cyclic < 1e-9
    detail = (
        f"U1 max error {worst_u1:.1e}, U2^2 - I {u2_error:.1e}, dark residual/Omega {dark:.1e}, "
        f"transport/Omega {transport:.1e}, cyclicity {cyclic:.1e}"
    )
    return passed, detail


def criterion_6():
    omegas = mhz(8) / 2.0 ** np.arange(4)
    scenario = SingleQubitScenario.hadamard()
    args = (scenario.theta, scenario.phi, omegas, scenario.g0, scenario.omega_c)
    shifted = rwa_convergence(*args, keep_ground_shift=True)
    unshifted = rwa_convergence(*args, keep_ground_shift=False)
    passed = bool(np.all(np.diff(shifted) < 0) and shifted[0] < 0.02)
    detail = (
        "distance at Omega/2pi = 8, 4, 2, 1 MHz: "
        + ", ".join(f"{d:.5f}" for d in shifted)
        + "; reduced model without the ground-state shift: "
        + ", ".join(f"{d:.5f}" for d in unshifted)
    )
    return passed, detail


def _oracle_models(rng):
    """Static models of dimension <= 12 with their preferred integration frame."""
    models = []
    for levels, cutoff in ((3, 4), (2, 6), (2, 3)):
        system = build_single_qubit_system(SingleQubitScenario.hadamard(levels=levels, fock_cutoff=cutoff))
        static = TimeDependentHamiltonian(system.static)
        models.append((f"JC {levels}x{cutoff}", LindbladModel(static, system.model.collapses), system.static))
    lam = build_heff1(DriveSpec.from_gate(np.pi / 4, np.pi, mhz(8), mhz(300), TWO_PI * 6.0))
    space = lam.hamiltonian.space
    decay = [np.zeros((3, 3)) for _ in range(2)]
    decay[0][0, 1] = decay[1][0, 2] = 1.0
    jumps = [(OperatorMatrix(space, d), mhz(0.01)) for d in decay]
    jumps.append((OperatorMatrix(space, np.diag([-1.0, 1.0, 1.0])), mhz(0.01)))
    models.append(("Lambda system", LindbladModel(TimeDependentHamiltonian(lam.hamiltonian), tuple(jumps)), None))
    a = annihilation(8)
    models.append(
        ("damped cavity", LindbladModel(TimeDependentHamiltonian((a.dag() @ a) * mhz(50)), ((a, 0.02),)), None)
    )
    for d in range(2, 13):
        space = HilbertSpace.single("x", d)
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = OperatorMatrix(space, 0.25 * (x + x.conj().T))
        jump = OperatorMatrix(space, rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        models.append((f"random d={d}", LindbladModel(TimeDependentHamiltonian(h), ((jump, 0.005),)), None))
    return models


def criterion_7():
    rng = np.random.default_rng(SEED)
    worst, worst_name = 0.0, ""
    models = _oracle_models(rng)
    for name, model, frame in models:
        d = model.space.dim
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho0 = DensityMatrix(model.space, x @ x.conj().T / np.trace(x @ x.conj().T))
        numeric = propagate_lindblad(model, rho0, 100.0, frame=frame).final
        distance = trace_distance(numeric, evolve_superoperator(model, rho0, 100.0))
        if distance >= worst:
            worst, worst_name = distance, name
    return worst < 1e-7, f"{len(models)} models, max trace distance {worst:.2e} ({worst_name}) at t = 100 ns"


def criterion_8():
    device = DeviceSpec()
    params = derive_cell_params(device)
    freqs = to_ghz(np.array(params.omega_c))
    freq_ok = np.all(np.abs(freqs / np.array([6.0, 7.2, 6.4]) - 1) <= 0.015)
    j13 = to_mhz(params.J_dc[(1, 3)])
    ratio_p = params.omega_p / params.delta_c
    _, slope = scaling_check(np.geomspace(params.E_J0 / 4, params.E_J0 * 4, 9), device)
    passed = bool(
        freq_ok
        and abs(j13 / 56.0 - 1) <= 0.05
        and ratio_p > 10
        and params.fourth_order_ratio < 1e-5
        and abs(slope + 1) <= 0.01
    )
    detail = (
        f"omega_c/2pi = {', '.join(f'{f:.3f}' for f in freqs)} GHz, J_dc13/2pi = {j13:.2f} MHz, "
        f"omega_p/delta_c = {ratio_p:.1f}, fourth-order ratio {params.fourth_order_ratio:.2e}, slope {slope:.4f}"
    )
    return passed, detail


def criterion_9():
    cell = CellSpec.standard(mhz(6))
    H = build_cell_ac(cell)
    g = cell.g[0]
    gaps13 = pair_transition_gaps(H, (1, 3))
    gaps23 = pair_transition_gaps(H, (2, 3))
    err13 = np.abs(np.sort(np.array(list(gaps13.values())) / g) - [2, 4, 4, 6]).max()
    target = gaps23["G+<->-G"] / g
    err23 = abs(target - 6)
    multiples = np.array(list(gaps23.values())) / g
    integer = np.abs(multiples - np.round(multiples)).max()
    tol = 1e-12
    passed = err13 < tol and err23 < tol and integer < tol
    detail = (
        f"(1,3) gaps/g = {sorted(np.round(np.array(list(gaps13.values())) / g, 12).tolist())}, "
        f"(2,3) gaps/g = {sorted(np.round(multiples, 12).tolist())}, target 6g error {err23:.1e}"
    )
    return passed, detail


CRITERIA = [
    (1, "Hadamard fidelity", criterion_1),
    (2, "NOT fidelity", criterion_2),
    (3, "averaged fidelities", criterion_3),
    (4, "two-qubit fidelity", criterion_4),
    (5, "ideal holonomy properties", criterion_5),
    (6, "RWA convergence", criterion_6),
    (7, "superoperator oracle", criterion_7),
    (8, "circuit pipeline", criterion_8),
    (9, "cell spectrum", criterion_9),
]


@pytest.mark.acceptance
@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check, capsys):
    passed, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, title, passed, detail))
    assert passed, detail


if __name__ == "__main__":
    failures = 0
    for number, title, check in CRITERIA:
        passed, detail = check()
        failures += not passed
        print(_line(number, title, passed, detail), flush=True)
    sys.exit(1 if failures else 0)
