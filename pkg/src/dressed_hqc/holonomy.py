"""Holonomic gates: ideal matrices, holonomy-condition checks and fidelities.

Single-qubit gates act on span{|G>, |->} of one dressed unit; the two-qubit
gate acts on span{|GG>, |G->, |-G>, |-->} of units 1 and 2 with the ancilla
(unit 3) returning to |G>. Fidelities compare the simulated lab-frame state
with the target state carried along by the free evolution of the undriven
system, i.e. they are evaluated in the rotating frame of the static
Hamiltonian.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    LindbladModel,
    expectation,
    populations,
    propagate_kets,
    propagate_lindblad,
    propagate_operators,
    trace_distance,
)
from .errors import ConfigurationError
from .hamiltonians import (
    CellSpec,
    DriveSpec,
    build_cell_ac,
    build_drive,
    build_h1_reduced,
    build_heff1,
    build_jc,
    cell_state,
    dressed_projector,
    secular_part,
    single_unit_space,
)
from .operators import (
    HilbertSpace,
    OperatorMatrix,
    StateVector,
    annihilation,
    dressed_basis,
    embed,
    matrix_exponential,
    transmon_ops,
)
from .units import ghz, mhz

WORKERS_ENV = "DRESSED_HQC_WORKERS"


# ---------------------------------------------------------------------------
# Ideal gates


@dataclass(frozen=True)
class SingleQubitGate:
    """U1(theta, phi) on span{|G>, |->}."""

    theta: float
    phi: float

    @property
    def matrix(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.array([[c, s * np.exp(1j * self.phi)], [s * np.exp(-1j * self.phi), -c]])


@dataclass(frozen=True)
class TwoQubitGate:
    """U2 on span{|GG>, |G->, |-G>, |-->}: swaps |G-> and |-G>, flips the sign of |-->."""

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)


def ideal_u1(theta: float, phi: float) -> SingleQubitGate:
    return SingleQubitGate(float(theta), float(phi))


def ideal_u2() -> TwoQubitGate:
    return TwoQubitGate()


def cyclic_time(kind: str, amplitude: float) -> float:
    """Gate time closing the cyclic evolution.

    ``kind="single"``: pi / Omega. ``kind="two"``: pi / (sqrt(2) T), since the
    two paths through the ancilla add up to an effective coupling sqrt(2) T.
    """
    if not amplitude > 0.0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    if kind == "single":
        return float(np.pi / amplitude)
    if kind == "two":
        return float(np.pi / (np.sqrt(2.0) * amplitude))
    raise ValueError(f"kind must be 'single' or 'two', got {kind!r}")


def process_distance(actual: np.ndarray, ideal: np.ndarray) -> float:
    """Trace distance between the normalized Choi states of A.A^dag and U.U^dag.

    Insensitive to a global phase; ``actual`` may be a non-unitary
    (leaky) block of a larger propagator.
    """
    actual, ideal = np.asarray(actual), np.asarray(ideal)
    d = ideal.shape[0]
    return trace_distance(actual.reshape(-1) / np.sqrt(d), ideal.reshape(-1) / np.sqrt(d))


# ---------------------------------------------------------------------------
# Holonomy conditions on the effective Lambda system


@dataclass(frozen=True)
class ParallelTransportReport:
    max_transport: float
    """max over samples and i, j in {d, b} of |<psi_i(t)|H|psi_j(t)>| (rad/ns)."""
    cyclicity_defect: float
    """max_i of the spectral norm of P_i(tau) - P_i(0) at the cyclic time."""
    dark_residual: float
    """|| H |d> ||."""
    gate_time: float
    Omega: float


def _evolve_effective(spec: DriveSpec, t: float):
    lam = build_heff1(spec)
    u = matrix_exponential(-1j * t * np.asarray(lam.hamiltonian.data))
    return lam, u @ lam.dark.data, u @ lam.bright.data


def cyclicity_defect(spec: DriveSpec, t: float, branch: str = "bright") -> float:
    """Spectral norm of |psi(t)><psi(t)| - |psi(0)><psi(0)| for one branch."""
    lam, dark, bright = _evolve_effective(spec, t)
    start, end = (lam.bright.data, bright) if branch == "bright" else (lam.dark.data, dark)
    diff = np.outer(end, end.conj()) - np.outer(start, start.conj())
    return float(np.linalg.norm(diff, 2))


def check_parallel_transport(spec: DriveSpec, n_samples: int = 101) -> ParallelTransportReport:
    """Sample the parallel-transport and cyclicity conditions under H_eff1."""
    if n_samples < 10:
        raise ValueError("n_samples must be at least 10")
    tau = cyclic_time("single", spec.Omega)
    lam = build_heff1(spec)
    h = np.asarray(lam.hamiltonian.data)
    worst = 0.0
    for t in np.linspace(0.0, tau, n_samples):
        _, dark, bright = _evolve_effective(spec, t)
        frame = np.column_stack([dark, bright])
        worst = max(worst, float(np.max(np.abs(frame.conj().T @ h @ frame))))
    defect = max(cyclicity_defect(spec, tau, "bright"), cyclicity_defect(spec, tau, "dark"))
    residual = float(np.linalg.norm(h @ lam.dark.data))
    return ParallelTransportReport(worst, defect, residual, tau, spec.Omega)


def effective_gate(spec: DriveSpec) -> np.ndarray:
    """exp(-i H_eff1 tau) at the cyclic time, restricted to span{|G>, |->}."""
    tau = cyclic_time("single", spec.Omega)
    u = matrix_exponential(-1j * tau * np.asarray(build_heff1(spec).hamiltonian.data))
    return u[:2, :2]


def reduced_model_gate(spec: DriveSpec, keep_ground_shift: bool = False, rtol: float = 1e-9) -> np.ndarray:
    """Propagator of the driven 3-level reduced model at pi/Omega.

    Returned on span{|G>, |->} in the rotating frame of diag(0, E-, E+),
    i.e. directly comparable with U1.
    """
    H = build_h1_reduced(spec, keep_ground_shift)
    tau = cyclic_time("single", spec.Omega)
    states, _ = propagate_kets(H, np.eye(3)[:, :2], tau, rtol=rtol, frame=H.static)
    rotate = np.exp(1j * np.array(spec.energies) * tau)
    return (rotate[:, None] * states[-1])[:2, :2]


def rwa_convergence(theta: float, phi: float, Omegas, g0: float, omega_c: float, keep_ground_shift: bool):
    """Process distance between the reduced-model propagator and U1 for each Omega."""
    ideal = ideal_u1(theta, phi).matrix
    out = []
    for omega in Omegas:
        spec = DriveSpec.from_gate(theta, phi, omega, g0, omega_c)
        out.append(process_distance(reduced_model_gate(spec, keep_ground_shift), ideal))
    return np.array(out)


# ---------------------------------------------------------------------------
# Scenario descriptions


@dataclass(frozen=True)
class SingleQubitScenario:
    """Single dressed qubit driven by the two-tone drive; rates in rad/ns.

    The transmon is resonant with its resonator. Each transmon transition
    (j, j+1) gets decay ``gamma1`` and dephasing ``gamma2``; the resonator
    decays at ``kappa``. ``initial`` holds amplitudes on (|G>, |->).
    """

    theta: float
    phi: float
    name: str = "custom"
    Omega: float = mhz(8.0)
    omega_c: float = ghz(6.0)
    g0: float = mhz(300.0)
    anharmonicity: float = mhz(310.0)
    kappa: float = mhz(0.01)
    gamma1: float = mhz(0.01)
    gamma2: float = mhz(0.01)
    levels: int = 3
    fock_cutoff: int = 5
    decoherence: bool = True
    drive_extension: str = "pauli"
    duration: float | None = None
    output_resolution: float | None = None
    rtol: float = 1e-8
    initial: tuple[complex, complex] = (1.0, 0.0)

    @classmethod
    def hadamard(cls, **kwargs) -> SingleQubitScenario:
        # phi = pi maps |G> to (|G> - |->)/sqrt(2)
        return cls(theta=np.pi / 4, phi=np.pi, name="hadamard", **kwargs)

    @classmethod
    def not_gate(cls, **kwargs) -> SingleQubitScenario:
        return cls(theta=np.pi / 2, phi=0.0, name="not", **kwargs)

    @property
    def drive(self) -> DriveSpec:
        return DriveSpec.from_gate(self.theta, self.phi, self.Omega, self.g0, self.omega_c)

    @property
    def gate_time(self) -> float:
        return cyclic_time("single", self.Omega)

    @property
    def total_time(self) -> float:
        return self.gate_time if self.duration is None else float(self.duration)

    @property
    def gate(self) -> SingleQubitGate:
        return ideal_u1(self.theta, self.phi)

    def initial_amplitudes(self) -> np.ndarray:
        amps = np.asarray(self.initial, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ConfigurationError("initial state amplitudes are all zero")
        return amps / norm


@dataclass(frozen=True)
class TwoQubitScenario:
    """Three-unit dressed cell; ``T13``/``T23`` and rates in rad/ns."""

    name: str = "two_qubit"
    T13: float = mhz(6.0)
    T23: float | None = None
    omega_c: float = ghz(6.0)
    g: float = mhz(100.0)
    rate: float = mhz(0.01)
    decoherence: bool = True
    initial: str = "-GG"
    target: str = "G-G"
    duration: float | None = None
    output_resolution: float | None = None
    rtol: float = 1e-8

    @property
    def cell(self) -> CellSpec:
        spec = CellSpec.standard(self.T13, self.omega_c, self.g)
        return replace(spec, T23=self.T13 if self.T23 is None else self.T23)

    @property
    def gate_time(self) -> float:
        return cyclic_time("two", abs(self.T13))

    @property
    def total_time(self) -> float:
        return self.gate_time if self.duration is None else float(self.duration)


@dataclass(frozen=True, eq=False)
class SingleQubitSystem:
    model: LindbladModel
    static: OperatorMatrix
    basis: tuple[StateVector, StateVector, StateVector]
    energies: tuple[float, float, float]


def build_single_qubit_system(scenario: SingleQubitScenario) -> SingleQubitSystem:
    space = single_unit_space(scenario.levels, scenario.fock_cutoff)
    jc = build_jc(
        scenario.omega_c,
        scenario.omega_c,
        scenario.g0,
        space,
        anharmonicity=scenario.anharmonicity if scenario.levels == 3 else None,
    )
    H = jc + build_drive(scenario.drive, space, scenario.drive_extension)
    collapses = []
    if scenario.decoherence:
        tops = transmon_ops(scenario.levels)
        collapses.append((embed(annihilation(scenario.fock_cutoff), space, "cavity"), scenario.kappa))
        for lower, sz in zip(tops.lowering, tops.sigma_z):
            collapses.append((embed(lower, space, "transmon"), scenario.gamma1))
            collapses.append((embed(sz, space, "transmon"), scenario.gamma2))
    basis = dressed_basis(scenario.g0, scenario.omega_c, space)
    return SingleQubitSystem(LindbladModel(H, tuple(collapses)), jc.static, basis.states, basis.energies)


def cell_collapses(space: HilbertSpace, rate: float):
    """Dressed decay |G><-|, |G><+| and dephasing diag(-1, 1, 1) on every unit."""
    collapses = []
    for unit in range(1, len(space.dims) + 1):
        label = f"unit{unit}"
        local_space = HilbertSpace.single(label, 3)
        for level in (1, 2):
            jump = np.zeros((3, 3))
            jump[0, level] = 1.0
            collapses.append((embed(OperatorMatrix(local_space, jump), space, label), rate))
        dephase = OperatorMatrix(local_space, np.diag([-1.0, 1.0, 1.0]), hermitian=True)
        collapses.append((embed(dephase, space, label), rate))
    return tuple(collapses)


def build_two_qubit_model(scenario: TwoQubitScenario) -> LindbladModel:
    H = build_cell_ac(scenario.cell)
    collapses = cell_collapses(H.space, scenario.rate) if scenario.decoherence else ()
    return LindbladModel(H, collapses)


# ---------------------------------------------------------------------------
# Simulation results


@dataclass
class GateRun:
    """Time series on the output grid plus the end-of-gate summary."""

    times: np.ndarray
    populations: dict[str, np.ndarray]
    fidelity: np.ndarray
    gate_time: float
    final_fidelity: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class FidelityReport:
    scenario: str
    final_fidelity: float
    gate_time: float
    run: GateRun | None = None
    details: dict = field(default_factory=dict)


def output_grid(duration: float, resolution: float | None):
    """(output times, propagation times): floor(duration/res) + 1 output rows.

    The propagation grid additionally contains ``duration`` so the final
    state is always computed.
    """
    if resolution is None or duration == 0.0:
        out = np.array([0.0, duration]) if duration > 0 else np.array([0.0])
    else:
        if not resolution > 0:
            raise ValueError("output resolution must be positive")
        n = int(np.floor(duration / resolution + 1e-9))
        out = np.minimum(np.arange(n + 1) * resolution, duration)
    full = out if np.isclose(out[-1], duration, rtol=0, atol=1e-12) else np.append(out, duration)
    return out, full


def _clip_fidelity(value):
    return float(np.clip(np.real(value), 0.0, 1.0))


def simulate_gate_fidelity(scenario: SingleQubitScenario | TwoQubitScenario, frame: bool = True) -> FidelityReport:
    """Full master-equation run of one scenario and its final fidelity <psi_f|rho|psi_f>."""
    if isinstance(scenario, TwoQubitScenario):
        return _simulate_two_qubit(scenario, frame)
    system = build_single_qubit_system(scenario)
    ground, minus, plus = (s.data for s in system.basis)
    amps = scenario.initial_amplitudes()
    target_amps = scenario.gate.matrix @ amps
    e_minus = system.energies[1]
    psi0 = StateVector.normalized(system.model.space, amps[0] * ground + amps[1] * minus)
    duration = scenario.total_time
    out_times, times = output_grid(duration, scenario.output_resolution)

    result = propagate_lindblad(
        system.model,
        psi0,
        duration,
        times=times,
        rtol=scenario.rtol,
        frame=system.static if frame else None,
    )
    basis = np.column_stack([ground, minus, plus])
    pops = np.array([populations(rho, basis) for rho in result.states])
    fid = np.array(
        [
            _clip_fidelity(expectation(rho, np.outer(v, v.conj())))
            for t, rho in zip(times, result.states)
            for v in [target_amps[0] * ground + target_amps[1] * np.exp(-1j * e_minus * t) * minus]
        ]
    )
    n = out_times.size
    run = GateRun(
        out_times,
        {"G": pops[:n, 0], "minus": pops[:n, 1], "plus": pops[:n, 2], "leakage": 1.0 - pops[:n].sum(axis=1)},
        fid[:n],
        scenario.gate_time,
        float(fid[-1]),
        dict(result.diagnostics),
    )
    return FidelityReport(scenario.name, run.final_fidelity, scenario.gate_time, run)


def _simulate_two_qubit(scenario: TwoQubitScenario, frame: bool) -> FidelityReport:
    model = build_two_qubit_model(scenario)
    space = model.space
    psi0 = cell_state(space, scenario.initial)
    target = cell_state(space, scenario.target)
    duration = scenario.total_time
    out_times, times = output_grid(duration, scenario.output_resolution)
    H0 = model.hamiltonian.static
    result = propagate_lindblad(model, psi0, duration, times=times, rtol=scenario.rtol, frame=H0 if frame else None)
    # a basis-state target is invariant under the diagonal free evolution
    fid = np.array([_clip_fidelity(expectation(rho, target.projector())) for rho in result.states])
    pops = {}
    for unit in (1, 2, 3):
        for level, name in enumerate(("G", "minus", "plus")):
            proj = dressed_projector(space, unit, level)
            pops[f"{name}_{unit}"] = np.array([expectation(rho, proj) for rho in result.states])[: out_times.size]
    run = GateRun(out_times, pops, fid[: out_times.size], scenario.gate_time, float(fid[-1]), dict(result.diagnostics))
    return FidelityReport(scenario.name, run.final_fidelity, scenario.gate_time, run)


# ---------------------------------------------------------------------------
# Averaged single-qubit fidelity


def input_angles(n_states: int) -> np.ndarray:
    """Deterministic uniform grid of theta' over [0, 2 pi)."""
    if n_states < 2:
        raise ValueError("n_states must be at least 2")
    return 2.0 * np.pi * np.arange(n_states) / n_states


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _single_state_fidelity(args):
    scenario, angle = args
    amps = (np.cos(angle), np.sin(angle))
    return simulate_gate_fidelity(replace(scenario, initial=amps, output_resolution=None)).final_fidelity


def average_gate_fidelity(
    scenario: SingleQubitScenario,
    n_states: int = 1000,
    method: str = "linear",
    workers: int | None = None,
) -> FidelityReport:
    """Mean fidelity over inputs cos(t')|G> + sin(t')|-> on a uniform t' grid.

    ``method="linear"`` propagates the four operators |i><j|, i, j in {G, -},
    once and combines them for every input (the master-equation flow is
    linear), which also yields the averaged fidelity along the whole run.
    ``method="direct"`` propagates every input state separately across a
    process pool; results are merged by input index.
    """
    angles = input_angles(n_states)
    if method == "direct":
        jobs = [(scenario, angle) for angle in angles]
        n_workers = worker_count(workers)
        if n_workers == 1:
            values = [_single_state_fidelity(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                values = list(pool.map(_single_state_fidelity, jobs, chunksize=max(1, len(jobs) // (4 * n_workers))))
        values = np.array(values)
        return FidelityReport(
            scenario.name,
            float(values.mean()),
            scenario.gate_time,
            None,
            {"method": method, "n_states": n_states, "per_state": values, "workers": n_workers},
        )
    if method != "linear":
        raise ValueError(f"unknown method {method!r}")

    system = build_single_qubit_system(scenario)
    logical = np.column_stack([system.basis[0].data, system.basis[1].data])
    units = np.array([[np.outer(logical[:, i], logical[:, j].conj()) for j in range(2)] for i in range(2)])
    duration = scenario.total_time
    out_times, times = output_grid(duration, scenario.output_resolution)
    states, info = propagate_operators(
        system.model, units.reshape(4, *units.shape[2:]), duration, times, scenario.rtol, frame=system.static
    )
    inputs = np.stack([np.cos(angles), np.sin(angles)], axis=1).astype(complex)
    outputs = inputs @ scenario.gate.matrix.T
    e_minus = system.energies[1]
    series = []
    for t, batch in zip(times, states):
        frame_basis = logical * np.array([1.0, np.exp(-1j * e_minus * t)])
        # M[i, j, k, l] = <k_t| X_ij(t) |l_t>
        m = np.einsum("ak,ijab,bl->ijkl", frame_basis.conj(), batch.reshape(2, 2, *batch.shape[1:]), frame_basis)
        fid = np.real(np.einsum("si,sj,sk,sl,ijkl->s", inputs, inputs.conj(), outputs.conj(), outputs, m))
        series.append(np.clip(fid, 0.0, 1.0))
    series = np.array(series)
    mean = series.mean(axis=1)
    n = out_times.size
    run = GateRun(
        out_times,
        {"min": series[:n].min(axis=1), "max": series[:n].max(axis=1)},
        mean[:n],
        scenario.gate_time,
        float(mean[-1]),
        dict(info),
    )
    return FidelityReport(
        scenario.name,
        float(mean[-1]),
        scenario.gate_time,
        run,
        {"method": method, "n_states": n_states, "per_state": series[-1]},
    )


def closed_system_average_fidelity(scenario: SingleQubitScenario, n_states: int = 1000, rtol: float = 1e-10) -> float:
    """Averaged fidelity of the coherent (decoherence-free) gate via Schrödinger propagation.

    |G> and |-> are propagated together; every input on the theta' grid is a
    superposition of the two, and its fidelity is |<target|psi>|^2.
    """
    system = build_single_qubit_system(replace(scenario, decoherence=False))
    H = system.model.hamiltonian
    logical = np.column_stack([system.basis[0].data, system.basis[1].data])
    duration = scenario.total_time
    states, _ = propagate_kets(H, logical, duration, rtol=rtol, frame=system.static)
    frame_basis = logical * np.array([1.0, np.exp(-1j * system.energies[1] * duration)])
    block = frame_basis.conj().T @ states[-1]
    angles = input_angles(n_states)
    inputs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    overlaps = np.einsum("sk,kl,sl->s", (inputs @ scenario.gate.matrix.T).conj(), block, inputs)
    return float(np.mean(np.abs(overlaps) ** 2))


# ---------------------------------------------------------------------------
# Two-qubit gate in the rotating-wave limit

COMPUTATIONAL_LABELS = ("GGG", "G-G", "-GG", "--G")


def rwa_cell_hamiltonian(cell: CellSpec) -> OperatorMatrix:
    """Stationary part of the modulated cell in the frame of its local energies."""
    H = build_cell_ac(cell)
    return secular_part(H, H.static)


def rwa_two_qubit_gate(cell: CellSpec, duration: float | None = None) -> np.ndarray:
    """RWA cell propagator on span{|GG>, |G->, |-G>, |-->} (ancilla in |G>)."""
    if duration is None:
        duration = cyclic_time("two", abs(cell.T13))
    h = rwa_cell_hamiltonian(cell)
    u = matrix_exponential(-1j * duration * np.asarray(h.data))
    space = h.space
    idx = [space.basis_index([{"G": 0, "-": 1}[ch] for ch in label]) for label in COMPUTATIONAL_LABELS]
    return u[np.ix_(idx, idx)]
