"""Hamiltonian builders for dressed-state qubits and the three-unit cell.

Lab-frame models (``build_jc`` + ``build_drive``, ``build_cell_ac``) are the
ones propagated in simulations. The reduced 3x3 model and the effective
Lambda-system Hamiltonian exist for analysis. ``rotating_frame`` performs the
exact interaction-picture transformation; ``secular_part`` is the separate,
explicit rotating-wave step that keeps only stationary terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DimensionError
from .operators import (
    HilbertSpace,
    OperatorMatrix,
    StateVector,
    annihilation,
    embed,
    is_hermitian,
    transmon_ops,
)

Envelope = Callable[[float], float]

DRESSED_LABELS = ("G", "minus", "plus")


@dataclass(frozen=True)
class Tone:
    """Real cosine envelope ``amplitude * cos(frequency * t + phase)``.

    Unlike a bare closure a Tone knows its Fourier content, which is what
    :func:`secular_part` needs, and it pickles for process pools.
    """

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.cos(self.frequency * t + self.phase)

    def components(self):
        """(complex weight, frequency) pairs with sum w e^{i f t} == self(t)."""
        half = 0.5 * self.amplitude
        if self.frequency == 0.0:
            return [(self.amplitude * np.cos(self.phase), 0.0)]
        return [(half * np.exp(1j * self.phase), self.frequency), (half * np.exp(-1j * self.phase), -self.frequency)]


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    """H(t) = static + sum_k envelope_k(t) * operator_k.

    When ``frame`` is set the object represents the interaction-picture
    Hamiltonian ``exp(i H0 t) (H(t) - H0) exp(-i H0 t)`` with ``H0 = frame``;
    see :func:`rotating_frame`.
    """

    static: OperatorMatrix
    terms: tuple[tuple[OperatorMatrix, Envelope], ...] = ()
    frame: OperatorMatrix | None = None
    _frame_eig: tuple | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        terms = tuple((op, env) for op, env in self.terms)
        object.__setattr__(self, "terms", terms)
        if not is_hermitian(self.static.data):
            raise DimensionError("static part must be Hermitian")
        for op, _ in terms:
            if op.space != self.static.space:
                raise DimensionError("all Hamiltonian terms must share one space")
            if not is_hermitian(op.data):
                raise DimensionError("modulation operators must be Hermitian")
        if self.frame is not None:
            if self.frame.space != self.static.space or not is_hermitian(self.frame.data):
                raise DimensionError("frame Hamiltonian must be Hermitian on the same space")
            energies, vectors = np.linalg.eigh(self.frame.data)
            object.__setattr__(self, "_frame_eig", (energies, vectors))

    @property
    def space(self) -> HilbertSpace:
        return self.static.space

    @property
    def dim(self) -> int:
        return self.static.dim

    @property
    def is_static(self) -> bool:
        return not self.terms and self.frame is None

    def lab_at(self, t: float) -> np.ndarray:
        """static + sum env(t) op, ignoring any frame."""
        h = np.array(self.static.data)
        for op, env in self.terms:
            h = h + env(t) * op.data
        return h

    def at(self, t: float) -> np.ndarray:
        h = self.lab_at(t)
        if self.frame is None:
            return h
        energies, vectors = self._frame_eig
        h_eig = vectors.conj().T @ (h - self.frame.data) @ vectors
        phase = np.exp(1j * t * energies)
        return vectors @ (phase[:, None] * h_eig * phase.conj()[None, :]) @ vectors.conj().T

    __call__ = at

    def __add__(self, other: TimeDependentHamiltonian) -> TimeDependentHamiltonian:
        if not isinstance(other, TimeDependentHamiltonian):
            return NotImplemented
        if self.frame is not None or other.frame is not None:
            raise ValueError("add Hamiltonians before moving to a rotating frame")
        return TimeDependentHamiltonian(self.static + other.static, self.terms + other.terms)

    def frame_components(self):
        """Arrays used by the interaction-picture integrator.

        Returns ``(energies, vectors, static_eig, [(op_eig, env), ...])`` where
        the ``*_eig`` matrices are expressed in the eigenbasis of the frame
        and ``static_eig`` already has ``diag(energies)`` removed. In that
        basis the interaction picture is an elementwise phase
        ``exp(i (E_m - E_n) t)``.
        """
        if self.frame is None:
            raise ValueError("Hamiltonian has no frame")
        energies, vectors = self._frame_eig
        to_eig = lambda m: vectors.conj().T @ m @ vectors  # noqa: E731
        static_eig = to_eig(self.static.data) - np.diag(energies)
        terms_eig = [(to_eig(op.data), env) for op, env in self.terms]
        return energies, vectors, static_eig, terms_eig


def static_hamiltonian(op: OperatorMatrix) -> TimeDependentHamiltonian:
    return TimeDependentHamiltonian(op)


# ---------------------------------------------------------------------------
# Drive and cell parameter containers


@dataclass(frozen=True)
class DriveSpec:
    """Two-tone drive amplitudes and phase for a single dressed qubit.

    ``Omega1`` sets the sigma_z tone (|-> <-> |+>), ``Omega2`` the sigma_x
    tone (|G> <-> |+>). All frequencies in rad/ns.
    """

    Omega1: float
    Omega2: float
    phi: float
    g0: float
    omega_c: float

    def __post_init__(self):
        if not self.Omega > 0.0:
            raise ConfigurationError("drive amplitude sqrt(Omega1^2 + Omega2^2) must be positive")

    @classmethod
    def from_gate(cls, theta: float, phi: float, Omega: float, g0: float, omega_c: float) -> DriveSpec:
        """Amplitudes realising U1(theta, phi) with total Rabi frequency ``Omega``."""
        return cls(Omega * np.cos(theta / 2), Omega * np.sin(theta / 2), phi, g0, omega_c)

    @property
    def Omega(self) -> float:
        return float(np.hypot(self.Omega1, self.Omega2))

    @property
    def theta(self) -> float:
        return float(np.mod(2.0 * np.arctan2(self.Omega2, self.Omega1), 2.0 * np.pi))

    @property
    def f1(self) -> Tone:
        return Tone(self.Omega1, 2.0 * self.g0)

    @property
    def f2(self) -> Tone:
        return Tone(self.Omega2, self.omega_c + self.g0, self.phi)

    @property
    def energies(self) -> tuple[float, float, float]:
        return (0.0, self.omega_c - self.g0, self.omega_c + self.g0)


@dataclass(frozen=True)
class CellSpec:
    """Three dressed units sharing a grounding SQUID.

    Unit 3 is the ancilla. The two target transitions |-G>_{j3} <-> |G+>_{j3}
    share a single modulation frequency only for the configuration
    ``omega_c = (w, w + 3 delta, w + delta)`` with ``delta = 4 g`` and equal
    couplings, which is checked unless ``check_configuration=False``.
    """

    omega_c: tuple[float, float, float]
    g: tuple[float, float, float]
    T13: float
    T23: float
    modulation_frequency: float | None = None
    check_configuration: bool = True

    def __post_init__(self):
        if len(self.omega_c) != 3 or len(self.g) != 3:
            raise ConfigurationError("a cell has exactly three units")
        object.__setattr__(self, "omega_c", tuple(float(w) for w in self.omega_c))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        if self.modulation_frequency is None:
            object.__setattr__(self, "modulation_frequency", 6.0 * self.g[0])
        if self.check_configuration:
            self.validate()

    def validate(self):
        g1, g2, g3 = self.g
        w1, w2, w3 = self.omega_c
        scale = max(abs(w) for w in self.omega_c)
        if not (np.isclose(g1, g2, rtol=1e-9) and np.isclose(g1, g3, rtol=1e-9)):
            raise ConfigurationError(f"unit couplings must be equal, got {self.g}")
        delta = 4.0 * g1
        expected = (w1, w1 + 3 * delta, w1 + delta)
        if max(abs(a - b) for a, b in zip(self.omega_c, expected)) > 1e-9 * scale:
            raise ConfigurationError(
                "cell frequencies must be (w, w + 3 delta, w + delta) with delta = 4 g; "
                f"got {self.omega_c}, expected {expected}"
            )

    @classmethod
    def standard(cls, T: float, omega_c: float = 2 * np.pi * 6.0, g: float = 2 * np.pi * 0.1) -> CellSpec:
        """Cell with equal couplings g, spacing delta = 4 g and equal hopping T on both pairs."""
        delta = 4.0 * g
        return cls((omega_c, omega_c + 3 * delta, omega_c + delta), (g, g, g), T, T)

    @property
    def delta_c(self) -> float:
        return self.omega_c[2] - self.omega_c[0]


# ---------------------------------------------------------------------------
# Single-unit models


def single_unit_space(levels: int = 3, cutoff: int = 5) -> HilbertSpace:
    return HilbertSpace((("transmon", levels), ("cavity", cutoff)))


def build_jc(
    omega_q: float,
    omega_c: float,
    g0: float,
    space: HilbertSpace,
    anharmonicity: float | None = None,
    qubit: str = "transmon",
    cavity: str = "cavity",
) -> TimeDependentHamiltonian:
    """Jaynes-Cummings Hamiltonian of one transmon-resonator unit.

    Energies are measured from |0>_q|0>_c, i.e. the qubit term is
    ``omega_q |1><1|`` (the ``omega_q sigma_z / 2`` form up to a constant),
    so the dressed energies are exactly 0 and omega_c +- g0. A third
    transmon level sits at ``2 omega_q - anharmonicity`` and couples to the
    resonator with the ladder factor sqrt(2).
    """
    for label in (qubit, cavity):
        space.index(label)
    levels = space.factor_dim(qubit)
    tops = transmon_ops(levels, qubit)
    if levels == 3 and anharmonicity is None:
        raise ConfigurationError("a three-level transmon needs an anharmonicity")
    level_energy = [0.0, omega_q, 2.0 * omega_q - (anharmonicity or 0.0)][:levels]
    a = embed(annihilation(space.factor_dim(cavity), cavity), space, cavity)
    b = embed(tops.ladder, space, qubit)
    h_q = embed(OperatorMatrix(tops.space, np.diag(level_energy)), space, qubit)
    coupling = a @ b.dag()
    h = h_q + omega_c * (a.dag() @ a) + g0 * (coupling + coupling.dag())
    return TimeDependentHamiltonian(OperatorMatrix(space, h.data, hermitian=True))


def drive_operators(space: HilbertSpace, extension: str = "pauli", qubit: str = "transmon"):
    """(sigma_z, sigma_x) drive operators on the transmon factor.

    ``extension="pauli"`` uses the two-level Pauli matrices on {|0>, |1>}
    and leaves a third level untouched. ``extension="ladder"`` uses
    ``2n - 1`` for sigma_z and ``b + b^dag`` (1<->2 element sqrt(2)) for
    sigma_x, i.e. a harmonic-ladder continuation of the same operators.
    """
    levels = space.factor_dim(qubit)
    tops = transmon_ops(levels, qubit)
    if extension == "pauli":
        sz, sx = tops.pauli_z, tops.pauli_x
    elif extension == "ladder":
        sz = OperatorMatrix(tops.space, np.diag(2.0 * np.arange(levels) - 1.0), hermitian=True)
        sx = tops.ladder + tops.ladder.dag()
    else:
        raise ValueError(f"unknown drive extension {extension!r}")
    return embed(sz, space, qubit), embed(sx, space, qubit)


def build_drive(
    spec: DriveSpec, space: HilbertSpace, extension: str = "pauli", qubit: str = "transmon"
) -> TimeDependentHamiltonian:
    """Two-tone drive ``2 f1(t) sigma_z + 2 sqrt(2) f2(t) sigma_x``.

    f1 = Omega1 cos(2 g0 t), f2 = Omega2 cos((omega_c + g0) t + phi).
    """
    sz, sx = drive_operators(space, extension, qubit)
    terms = ((2.0 * sz, spec.f1), (2.0 * np.sqrt(2.0) * sx, spec.f2))
    return TimeDependentHamiltonian(OperatorMatrix.zeros(space), terms)


def dressed_space(label: str = "dressed") -> HilbertSpace:
    return HilbertSpace.single(label, 3)


def build_h1_reduced(spec: DriveSpec, keep_ground_shift: bool = False) -> TimeDependentHamiltonian:
    """Driven unit projected on span{|G>, |->, |+>}.

    The drive enters as 2 x [[0, -f2, f2], [-f2, ., -f1], [f2, -f1, .]] on
    top of diag(0, E-, E+). ``keep_ground_shift`` adds the -2 f1 diagonal
    element on |G> that the projection of the sigma_z tone produces; it
    is omitted by default.
    """
    space = dressed_space()
    static = OperatorMatrix(space, np.diag(spec.energies), hermitian=True)
    f2_op = 2.0 * np.array([[0, -1, 1], [-1, 0, 0], [1, 0, 0]], dtype=float)
    f1_op = 2.0 * np.array([[-1.0 if keep_ground_shift else 0.0, 0, 0], [0, 0, -1], [0, -1, 0]])
    terms = (
        (OperatorMatrix(space, f2_op, hermitian=True), spec.f2),
        (OperatorMatrix(space, f1_op, hermitian=True), spec.f1),
    )
    return TimeDependentHamiltonian(static, terms)


@dataclass(frozen=True)
class LambdaSystem:
    hamiltonian: OperatorMatrix
    bright: StateVector
    dark: StateVector
    ancilla: StateVector


def build_heff1(spec: DriveSpec) -> LambdaSystem:
    """Resonant Lambda-system Hamiltonian in the dressed rotating frame.

    Omega [sin(theta/2) e^{i phi} |G><+| - cos(theta/2) |-><+| + h.c.]
    = Omega (|+><b| + h.c.), with bright and dark states
    |b> = sin(theta/2) e^{i phi}|G> - cos(theta/2)|->,
    |d> = cos(theta/2)|G> + sin(theta/2) e^{-i phi}|->.
    """
    space = dressed_space()
    theta, phi, omega = spec.theta, spec.phi, spec.Omega
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 2] = omega * s * np.exp(1j * phi)
    h[1, 2] = -omega * c
    h = h + h.conj().T
    bright = StateVector(space, [s * np.exp(1j * phi), -c, 0.0])
    dark = StateVector(space, [c, s * np.exp(-1j * phi), 0.0])
    ancilla = StateVector(space, [0.0, 0.0, 1.0])
    return LambdaSystem(OperatorMatrix(space, h, hermitian=True), bright, dark, ancilla)


# ---------------------------------------------------------------------------
# Frames and the rotating-wave approximation


def rotating_frame(H: TimeDependentHamiltonian, H0: OperatorMatrix) -> TimeDependentHamiltonian:
    """Exact interaction picture: t -> e^{i H0 t} (H(t) - H0) e^{-i H0 t}.

    Nothing is dropped; use :func:`secular_part` for the RWA.
    """
    if H.frame is not None:
        raise ValueError("Hamiltonian is already in a rotating frame")
    return TimeDependentHamiltonian(H.static, H.terms, frame=H0)


def _fourier_terms(H: TimeDependentHamiltonian, H0: OperatorMatrix):
    """Yield (matrix in H0 eigenbasis, extra frequency, weight) for each Fourier piece."""
    energies, vectors = np.linalg.eigh(np.asarray(H0))
    to_eig = lambda m: vectors.conj().T @ np.asarray(m) @ vectors  # noqa: E731
    pieces = [(to_eig(H.static) - np.diag(energies), 0.0, 1.0)]
    for op, env in H.terms:
        if not isinstance(env, Tone):
            raise TypeError("the secular approximation needs Tone envelopes with known frequencies")
        op_eig = to_eig(op)
        for weight, freq in env.components():
            pieces.append((op_eig, freq, weight))
    return energies, vectors, pieces


def secular_part(H: TimeDependentHamiltonian, H0: OperatorMatrix, atol: float = 1e-9) -> OperatorMatrix:
    """Rotating-wave approximation of H in the interaction picture of H0.

    Every matrix element (in the eigenbasis of H0) of every Fourier
    component rotates as exp(i (E_m - E_n + nu) t); the components with
    ``|E_m - E_n + nu| <= atol`` are kept, the rest dropped. The result is a
    static operator in the original basis.
    """
    energies, vectors, pieces = _fourier_terms(H, H0)
    gaps = energies[:, None] - energies[None, :]
    kept = np.zeros((len(energies), len(energies)), dtype=complex)
    for matrix, freq, weight in pieces:
        mask = np.abs(gaps + freq) <= atol
        kept += np.where(mask, weight * matrix, 0.0)
    return OperatorMatrix(H.space, vectors @ kept @ vectors.conj().T)


def neglected_detunings(
    H: TimeDependentHamiltonian, H0: OperatorMatrix, atol: float = 1e-9, amplitude_tol: float = 1e-12
) -> np.ndarray:
    """Sorted |E_m - E_n + nu| of every non-zero component dropped by the RWA."""
    energies, _, pieces = _fourier_terms(H, H0)
    gaps = energies[:, None] - energies[None, :]
    found = []
    for matrix, freq, weight in pieces:
        detuning = np.abs(gaps + freq)
        mask = (detuning > atol) & (np.abs(weight * matrix) > amplitude_tol)
        found.extend(detuning[mask].tolist())
    return np.sort(np.array(found))


# ---------------------------------------------------------------------------
# Dressed multi-unit cells


def dressed_cell_space(n_units: int = 3) -> HilbertSpace:
    return HilbertSpace(tuple((f"unit{j + 1}", 3) for j in range(n_units)))


def dressed_creation(space: HilbertSpace, unit: int) -> OperatorMatrix:
    """Photon creation a^dag of unit ``unit`` (1-based) in the dressed basis.

    Truncated to one excitation per unit: a^dag -> (|-><G| + |+><G|)/sqrt(2).
    """
    local = np.zeros((3, 3))
    local[1, 0] = local[2, 0] = 1.0 / np.sqrt(2.0)
    return embed(OperatorMatrix(HilbertSpace.single(f"unit{unit}", 3), local), space, f"unit{unit}")


def dressed_projector(space: HilbertSpace, unit: int, level: int) -> OperatorMatrix:
    local = np.zeros((3, 3))
    local[level, level] = 1.0
    return embed(OperatorMatrix(HilbertSpace.single(f"unit{unit}", 3), local, hermitian=True), space, f"unit{unit}")


def build_dressed_cell(
    omega_c: Sequence[float],
    g: Sequence[float],
    couplings: Mapping[tuple[int, int], Envelope],
) -> TimeDependentHamiltonian:
    """Dressed units with local energies (0, w_j - g_j, w_j + g_j) and
    photon hopping J_jk(t) (a_j^dag a_k + h.c.) for each ``(j, k)`` in
    ``couplings`` (1-based unit numbers).
    """
    n = len(omega_c)
    space = dressed_cell_space(n)
    static = OperatorMatrix.zeros(space)
    for j in range(n):
        local = OperatorMatrix(
            HilbertSpace.single(f"unit{j + 1}", 3), np.diag([0.0, omega_c[j] - g[j], omega_c[j] + g[j]]), hermitian=True
        )
        static = static + embed(local, space, f"unit{j + 1}")
    terms = []
    for (j, k), envelope in couplings.items():
        hop = dressed_creation(space, j) @ dressed_creation(space, k).dag()
        terms.append((OperatorMatrix(space, (hop + hop.dag()).data, hermitian=True), envelope))
    return TimeDependentHamiltonian(OperatorMatrix(space, static.data, hermitian=True), tuple(terms))


def build_cell_ac(cell: CellSpec) -> TimeDependentHamiltonian:
    """Parametrically modulated three-unit cell on the 27-dim dressed space.

    J_13(t) = 4 T13 cos(nu t) and J_23(t) = 4 T23 cos(nu t), nu = 6 g by
    default. Counter-rotating a_j a_k terms are not included.
    """
    if cell.check_configuration:
        cell.validate()
    nu = cell.modulation_frequency
    couplings = {(1, 3): Tone(4.0 * cell.T13, nu), (2, 3): Tone(4.0 * cell.T23, nu)}
    return build_dressed_cell(cell.omega_c, cell.g, couplings)


def cell_state(space: HilbertSpace, label: str) -> StateVector:
    """Product dressed state from a string such as ``"-GG"`` (one char per unit)."""
    codes = {"G": 0, "-": 1, "+": 2}
    if len(label) != len(space.dims) or any(ch not in codes for ch in label):
        raise ValueError(f"state label {label!r} must use G, -, + once per unit")
    return StateVector.basis(space, [codes[ch] for ch in label])


def pair_transition_gaps(H: TimeDependentHamiltonian, pair: tuple[int, int]) -> dict[str, float]:
    """Gaps of the four hopping-allowed transitions between units ``pair``.

    Read off the static (local) energies of H; keys name the transition as
    ``"<state of pair>-><state of pair>"`` with unit ``pair[0]`` first.
    """
    j, k = pair
    space = H.space
    n = len(space.dims)
    static = np.real(np.diag(H.static.data))

    def energy(levels_jk):
        levels = [0] * n
        levels[j - 1], levels[k - 1] = levels_jk
        return static[space.basis_index(levels)]

    names = {0: "G", 1: "-", 2: "+"}
    gaps = {}
    for a, b in product((1, 2), (1, 2)):
        # a_j^dag a_k connects (G, b) with (a, G)
        start, end = (0, b), (a, 0)
        key = f"{names[start[0]]}{names[start[1]]}<->{names[end[0]]}{names[end[1]]}"
        gaps[key] = abs(energy(start) - energy(end))
    return gaps
