import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dressed_hqc.dynamics import propagate_schrodinger
from dressed_hqc.errors import ConfigurationError, DimensionError
from dressed_hqc.hamiltonians import (
    CellSpec,
    DriveSpec,
    TimeDependentHamiltonian,
    Tone,
    build_cell_ac,
    build_drive,
    build_dressed_cell,
    build_h1_reduced,
    build_heff1,
    build_jc,
    cell_state,
    dressed_cell_space,
    dressed_creation,
    neglected_detunings,
    pair_transition_gaps,
    rotating_frame,
    secular_part,
    single_unit_space,
)
from dressed_hqc.operators import HilbertSpace, OperatorMatrix, dressed_basis, embed, is_hermitian, matrix_exponential
from dressed_hqc.units import ghz, mhz

WC, G0, OMEGA = ghz(6), mhz(300), mhz(8)
G = mhz(100)
T = mhz(6)


def drive_spec(theta=np.pi / 4, phi=np.pi, omega=OMEGA):
    return DriveSpec.from_gate(theta, phi, omega, G0, WC)


def full_single(levels=3, cutoff=5, extension="pauli", spec=None):
    space = single_unit_space(levels, cutoff)
    jc = build_jc(WC, WC, G0, space, anharmonicity=mhz(310) if levels == 3 else None)
    return jc, jc + build_drive(spec or drive_spec(), space, extension)


# -- envelopes and containers ------------------------------------------------


def test_tone_components_reconstruct_signal():
    tone = Tone(1.3, 2.1, 0.4)
    t = np.linspace(0, 10, 7)
    rebuilt = sum(w * np.exp(1j * f * t) for w, f in tone.components())
    assert np.allclose(rebuilt, tone(t))
    assert Tone(2.0, 0.0, 0.5).components() == [(2.0 * np.cos(0.5), 0.0)]


def test_hamiltonian_rejects_mixed_spaces():
    a = OperatorMatrix.zeros(HilbertSpace.single("x", 2))
    b = OperatorMatrix.identity(HilbertSpace.single("y", 2))
    with pytest.raises(DimensionError):
        TimeDependentHamiltonian(a, ((b, Tone(1.0, 1.0)),))


def test_hamiltonian_rejects_non_hermitian_terms():
    space = HilbertSpace.single("x", 2)
    with pytest.raises(DimensionError):
        TimeDependentHamiltonian(OperatorMatrix.zeros(space), ((OperatorMatrix(space, [[0, 1], [0, 0]]), Tone(1, 1)),))


@pytest.mark.parametrize("levels", [2, 3])
def test_full_model_hermitian_at_random_times(levels, rng):
    _, H = full_single(levels)
    for t in rng.uniform(0, 100, 100):
        assert is_hermitian(H.at(t))


def test_cell_and_reduced_models_hermitian_at_random_times(rng):
    cell = build_cell_ac(CellSpec.standard(T))
    reduced = build_h1_reduced(drive_spec(), keep_ground_shift=True)
    for t in rng.uniform(0, 100, 100):
        assert is_hermitian(cell.at(t))
        assert is_hermitian(reduced.at(t))


# -- drive specification -----------------------------------------------------


def test_drive_spec_requires_amplitude():
    with pytest.raises(ConfigurationError):
        DriveSpec(0.0, 0.0, 0.0, G0, WC)


def test_hadamard_amplitude_ratios_give_quarter_pi():
    spec = DriveSpec(0.924 * OMEGA, 0.383 * OMEGA, 0.0, G0, WC)
    assert spec.theta == pytest.approx(np.pi / 4, abs=1e-3)


def test_equal_amplitudes_give_half_pi():
    spec = DriveSpec(OMEGA / np.sqrt(2), OMEGA / np.sqrt(2), 0.0, G0, WC)
    assert spec.theta == np.pi / 2


@given(st.floats(0.01, 2 * np.pi - 0.01), st.floats(0.1, 10.0))
def test_from_gate_round_trip(theta, omega):
    spec = DriveSpec.from_gate(theta, 0.3, omega, G0, WC)
    assert spec.Omega == pytest.approx(omega)
    assert spec.theta == pytest.approx(theta)


# -- Jaynes-Cummings and drive ----------------------------------------------


def test_jc_dressed_expectation_values():
    space = single_unit_space(2, 4)
    H = build_jc(WC, WC, G0, space)
    basis = dressed_basis(G0, WC, space)
    assert H.static.matrix_element(basis.plus, basis.plus).real == pytest.approx(WC + G0)
    assert H.static.matrix_element(basis.minus, basis.minus).real == pytest.approx(WC - G0)


def test_jc_without_coupling_is_diagonal():
    H = build_jc(WC, WC, 0.0, single_unit_space(3, 4), anharmonicity=mhz(310)).static.data
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def test_jc_three_level_energies_and_ladder_coupling():
    space = single_unit_space(3, 3)
    H = build_jc(WC, WC, G0, space, anharmonicity=mhz(310)).static.data
    two = space.basis_index([2, 0])
    one_one = space.basis_index([1, 1])
    assert H[two, two].real == pytest.approx(2 * WC - mhz(310))
    assert H[two, one_one].real == pytest.approx(np.sqrt(2) * G0)


def test_jc_three_level_requires_anharmonicity():
    with pytest.raises(ConfigurationError):
        build_jc(WC, WC, G0, single_unit_space(3, 3))


def test_pure_sigma_z_tone_is_diagonal_in_transmon_basis():
    space = single_unit_space(3, 3)
    H = build_drive(DriveSpec(OMEGA, 0.0, 0.0, G0, WC), space)
    for t in (0.0, 0.37, 5.0):
        h = H.at(t)
        assert np.count_nonzero(np.abs(h - np.diag(np.diag(h))) > 0) == 0


def test_drive_extension_on_third_level():
    space = single_unit_space(3, 2)
    spec = DriveSpec(0.0, OMEGA, 0.0, G0, WC)
    pauli = build_drive(spec, space, "pauli").terms[1][0].data
    ladder = build_drive(spec, space, "ladder").terms[1][0].data
    i1, i2 = space.basis_index([1, 0]), space.basis_index([2, 0])
    assert pauli[i1, i2] == 0
    assert ladder[i1, i2] == pytest.approx(2 * np.sqrt(2) * np.sqrt(2))
    with pytest.raises(ValueError):
        build_drive(spec, space, "cubic")


def test_drive_tone_frequencies():
    spec = drive_spec()
    assert spec.f1.frequency == pytest.approx(2 * G0)
    assert spec.f2.frequency == pytest.approx(WC + G0)
    assert spec.f2.phase == spec.phi


# -- reduced and effective models ------------------------------------------


def test_reduced_model_static_part():
    spec = drive_spec()
    H = build_h1_reduced(spec)
    assert np.allclose(H.static.data, np.diag([0.0, WC - G0, WC + G0]))


def test_reduced_model_drive_pattern(rng):
    spec = drive_spec()
    H = build_h1_reduced(spec)
    for t in rng.uniform(0, 60, 20):
        h = H.at(t)
        f1, f2 = spec.f1(t), spec.f2(t)
        assert h[0, 1] == pytest.approx(-2 * f2)
        assert h[0, 2] == pytest.approx(2 * f2)
        assert h[1, 2] == pytest.approx(-2 * f1)
        assert h[0, 0] == 0.0
    shifted = build_h1_reduced(spec, keep_ground_shift=True)
    assert shifted.at(0.0)[0, 0] == pytest.approx(-2 * spec.f1(0.0))


def test_reduced_model_is_projection_of_full_model(rng):
    """With the ground shift kept, the reduced model equals the full model projected on the dressed states."""
    spec = drive_spec()
    _, H = full_single(3, 4, spec=spec)
    basis = dressed_basis(G0, WC, H.space).matrix()
    reduced = build_h1_reduced(spec, keep_ground_shift=True)
    for t in rng.uniform(0, 60, 10):
        assert np.allclose(basis.conj().T @ H.at(t) @ basis, reduced.at(t), atol=1e-12)


@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_dark_state_decouples(theta, phi):
    spec = DriveSpec.from_gate(max(theta, 1e-3), phi, OMEGA, G0, WC)
    lam = build_heff1(spec)
    h = lam.hamiltonian.data
    assert np.linalg.norm(h @ lam.dark.data) < 1e-12 * spec.Omega
    assert lam.ancilla.data.conj() @ h @ lam.bright.data == pytest.approx(spec.Omega)
    assert abs(lam.dark.overlap(lam.bright)) < 1e-15


def test_effective_limit_theta_pi():
    lam = build_heff1(DriveSpec.from_gate(np.pi, 0.0, OMEGA, G0, WC))
    assert np.allclose(lam.bright.data, [1, 0, 0], atol=1e-15)
    h = lam.hamiltonian.data
    assert abs(h[1, 2]) < 1e-15 and h[0, 2] == pytest.approx(OMEGA)


def test_effective_model_is_secular_part_of_reduced_model():
    """The RWA of the reduced model in the dressed frame is the Lambda-system Hamiltonian."""
    spec = drive_spec(theta=0.7, phi=0.4)
    H = build_h1_reduced(spec)
    rwa = secular_part(H, H.static)
    assert np.allclose(rwa.data, build_heff1(spec).hamiltonian.data, atol=1e-12)
    assert np.allclose(secular_part(build_h1_reduced(spec, True), H.static).data, rwa.data, atol=1e-12)


def test_secular_part_requires_tones():
    space = HilbertSpace.single("x", 2)
    H = TimeDependentHamiltonian(OperatorMatrix.zeros(space), ((OperatorMatrix.identity(space), np.cos),))
    with pytest.raises(TypeError):
        secular_part(H, H.static)


# -- rotating frame ----------------------------------------------------------


def test_rotating_frame_of_static_part_vanishes():
    jc, _ = full_single()
    rotated = rotating_frame(jc, jc.static)
    for t in (0.0, 1.3, 40.0):
        assert np.allclose(rotated.at(t), 0.0)


def test_rotating_frame_transition_phases():
    """The static (1,3) hopping picks up e^{+-i k g t} with k in {2, 4, 6} on its transitions."""
    cell = CellSpec.standard(T)
    H = build_dressed_cell(cell.omega_c, cell.g, {(1, 3): Tone(1.0, 0.0)})
    rotated = rotating_frame(H, H.static)
    t = 0.3
    h0 = H.at(0.0) - H.static.data
    h = rotated.at(t)
    rows, cols = np.nonzero(np.abs(h0) > 1e-12)
    k = np.angle(h[rows, cols] / h0[rows, cols]) / (cell.g[0] * t)
    assert np.allclose(np.abs(h[rows, cols]), np.abs(h0[rows, cols]))
    assert set(np.round(np.abs(k), 9)) == {2.0, 4.0, 6.0}


def test_rotating_frame_evolution_is_equivalent():
    """Lab evolution equals exp(-i H0 t) applied to the rotating-frame evolution."""
    spec = drive_spec(omega=mhz(40))
    H = build_h1_reduced(spec, keep_ground_shift=True)
    psi0 = dressed_basis(G0, WC, single_unit_space(2, 2))  # only to reuse the normalisation
    del psi0
    from dressed_hqc.operators import StateVector

    start = StateVector(H.space, np.array([1, 1j, 0]) / np.sqrt(2))
    t_final = 7.0
    lab = propagate_schrodinger(H, start, t_final).final
    rotated = propagate_schrodinger(rotating_frame(H, H.static), start, t_final).final
    back = matrix_exponential(-1j * t_final * np.asarray(H.static.data)) @ rotated
    assert np.allclose(lab, back, atol=1e-8)
    fast = propagate_schrodinger(H, start, t_final, frame=H.static).final
    assert np.allclose(lab, fast, atol=1e-8)


def test_rotating_frame_refuses_double_transform():
    jc, H = full_single()
    with pytest.raises(ValueError):
        rotating_frame(rotating_frame(H, jc.static), jc.static)


# -- cell ----------------------------------------------------------------------


def test_cell_configuration_check():
    with pytest.raises(ConfigurationError):
        CellSpec((ghz(6), ghz(7), ghz(6.4)), (G, G, G), T, T)
    with pytest.raises(ConfigurationError):
        CellSpec((ghz(6), ghz(7.2), ghz(6.4)), (G, G, 1.1 * G), T, T)
    spec = CellSpec.standard(T)
    assert spec.delta_c == pytest.approx(4 * G)
    assert spec.modulation_frequency == pytest.approx(6 * G)


def test_cell_transition_gaps_pair_13():
    H = build_cell_ac(CellSpec.standard(T))
    gaps = sorted(pair_transition_gaps(H, (1, 3)).values())
    assert np.allclose(np.array(gaps) / G, [2, 4, 4, 6], rtol=0, atol=1e-12)


def test_cell_transition_gaps_pair_23():
    H = build_cell_ac(CellSpec.standard(T))
    gaps = pair_transition_gaps(H, (2, 3))
    assert gaps["G+<->-G"] / G == pytest.approx(6, abs=1e-12)
    assert np.allclose(sorted(np.array(list(gaps.values())) / G), [6, 8, 8, 10], atol=1e-12)


def test_cell_hopping_in_dressed_basis():
    space = dressed_cell_space()
    a_dag = dressed_creation(space, 1).data
    start = space.basis_index([0, 0, 0])
    assert a_dag[space.basis_index([1, 0, 0]), start] == pytest.approx(1 / np.sqrt(2))
    assert a_dag[space.basis_index([2, 0, 0]), start] == pytest.approx(1 / np.sqrt(2))


def test_cell_rwa_reduces_to_target_hopping():
    H = build_cell_ac(CellSpec.standard(T))
    rwa = secular_part(H, H.static).data
    space = H.space
    expected = np.zeros_like(rwa)
    for unit in (1, 2):
        local = np.zeros((3, 3))
        local[1, 0] = 1.0  # |-><G|
        ancilla = np.zeros((3, 3))
        ancilla[0, 2] = 1.0  # |G><+|
        term = embed(OperatorMatrix(HilbertSpace.single(f"unit{unit}", 3), local), space, f"unit{unit}").data
        term = term @ embed(OperatorMatrix(HilbertSpace.single("unit3", 3), ancilla), space, "unit3").data
        expected += T * (term + term.conj().T)
    assert np.allclose(rwa, expected, atol=1e-12)


def test_cell_neglected_terms_detuned_by_two_g():
    H = build_cell_ac(CellSpec.standard(T))
    detunings = neglected_detunings(H, H.static)
    assert detunings.size > 0
    assert detunings.min() >= 2 * G * (1 - 1e-9)
    assert detunings.min() == pytest.approx(2 * G)


def test_cell_without_hopping_is_trivial_in_rotating_frame():
    spec = CellSpec.standard(0.0)
    H = build_cell_ac(spec)
    assert np.allclose(secular_part(H, H.static).data, 0.0)
    rotated = rotating_frame(H, H.static)
    assert np.allclose(rotated.at(3.3), 0.0)


def test_cell_state_labels():
    space = dressed_cell_space()
    assert cell_state(space, "-GG").data[space.basis_index([1, 0, 0])] == 1
    with pytest.raises(ValueError):
        cell_state(space, "-G")
