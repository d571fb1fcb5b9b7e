"""Schrödinger and Lindblad propagation with observable recording.

The master equation is integrated in the form

    d rho / dt = i [rho, H(t)] + sum_k (rate_k / 2) (2 A rho A^dag - A^dag A rho - rho A^dag A),

which is the standard Lindblad equation with jump rate ``rate_k``. The
integrator is scipy's DOP853 (explicit 8th-order Runge-Kutta with adaptive
steps). With ``frame=H0`` the equation is integrated in the interaction
picture of a static ``H0`` and mapped back, which removes the fast
``exp(-i H0 t)`` rotation from the step-size control; the transformation is
exact, no terms are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import AccuracyError, DimensionError, StiffnessError
from .hamiltonians import TimeDependentHamiltonian, rotating_frame
from .operators import DensityMatrix, HilbertSpace, OperatorMatrix, StateVector

SCHRODINGER_RTOL = 1e-10
LINDBLAD_RTOL = 1e-8
FIRST_STEP = 0.01  # ns; resolves a 2 pi * 6.3 GHz carrier
TRACE_DRIFT_LIMIT = 1e-5

Observable = OperatorMatrix | Callable[[float, np.ndarray], float]


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus collapse operators ``(A_k, rate_k)`` with rates in rad/ns."""

    hamiltonian: TimeDependentHamiltonian
    collapses: tuple[tuple[OperatorMatrix, float], ...] = ()

    def __post_init__(self):
        collapses = tuple((op, float(rate)) for op, rate in self.collapses)
        for op, rate in collapses:
            if op.space != self.hamiltonian.space:
                raise DimensionError("collapse operator lives on a different space than the Hamiltonian")
            if not rate >= 0.0:
                raise ValueError(f"collapse rates must be non-negative, got {rate}")
        object.__setattr__(self, "collapses", collapses)

    @property
    def space(self) -> HilbertSpace:
        return self.hamiltonian.space

    def without_decoherence(self) -> LindbladModel:
        return LindbladModel(self.hamiltonian, ())


@dataclass
class PropagationResult:
    """States at the requested grid and recorded observables.

    ``states`` has shape ``(n_times, dim)`` for state vectors and
    ``(n_times, dim, dim)`` for density matrices. States are in the lab frame
    even when the integration used an interaction picture.
    """

    space: HilbertSpace
    times: np.ndarray
    states: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_density(self) -> bool:
        return self.states.ndim == 3

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def final_state(self) -> StateVector | DensityMatrix:
        if self.is_density:
            rho = self.final
            return DensityMatrix(self.space, 0.5 * (rho + rho.conj().T))
        return StateVector.normalized(self.space, self.final)


# ---------------------------------------------------------------------------
# Right-hand sides


class _Frame:
    """Interaction picture of a static H0 in its eigenbasis."""

    def __init__(self, H: TimeDependentHamiltonian, H0: OperatorMatrix):
        rotated = rotating_frame(H, H0)
        self.energies, self.vectors, self.static, self.terms = rotated.frame_components()
        self.gaps = self.energies[:, None] - self.energies[None, :]

    def to_eig(self, matrix):
        return self.vectors.conj().T @ matrix @ self.vectors

    def phases(self, t):
        return np.exp(1j * t * self.gaps)

    def hamiltonian(self, t, phase):
        h = np.array(self.static)
        for op, env in self.terms:
            h = h + env(t) * op
        return h * phase

    def ket_to_lab(self, t, psi):
        return self.vectors @ (np.exp(-1j * self.energies * t)[:, None] * psi)

    def ket_from_lab(self, psi):
        return self.vectors.conj().T @ psi

    def rho_to_lab(self, t, rho):
        rot = np.exp(-1j * self.energies * t)
        return self.vectors @ (rot[:, None] * rho * rot.conj()[None, :]) @ self.vectors.conj().T

    def rho_from_lab(self, rho):
        return self.vectors.conj().T @ rho @ self.vectors


def _schrodinger_rhs(H: TimeDependentHamiltonian, frame: _Frame | None, shape):
    if frame is None:

        def rhs(t, y):
            return (-1j * (H.at(t) @ y.reshape(shape))).ravel()

    else:

        def rhs(t, y):
            h = frame.hamiltonian(t, frame.phases(t))
            return (-1j * (h @ y.reshape(shape))).ravel()

    return rhs


def _lindblad_rhs(model: LindbladModel, frame: _Frame | None, shape):
    # d rho = -i (Heff rho - rho Heff^dag) + sum rate A rho A^dag, Heff = H - iK
    ops = [(np.asarray(op.data), rate) for op, rate in model.collapses if rate > 0.0]
    if frame is None:
        k_half = sum((0.5 * rate * op.conj().T @ op for op, rate in ops), np.zeros(shape[-2:], complex))

        def rhs(t, y):
            rho = y.reshape(shape)
            heff = model.hamiltonian.at(t) - 1j * k_half
            out = -1j * (heff @ rho - rho @ heff.conj().T)
            for op, rate in ops:
                out += rate * (op @ rho @ op.conj().T)
            return out.ravel()

    else:
        ops = [(frame.to_eig(op), rate) for op, rate in ops]
        k_half = sum((0.5 * rate * op.conj().T @ op for op, rate in ops), np.zeros(shape[-2:], complex))

        def rhs(t, y):
            rho = y.reshape(shape)
            phase = frame.phases(t)
            heff = frame.hamiltonian(t, phase) - 1j * (k_half * phase)
            out = -1j * (heff @ rho - rho @ heff.conj().T)
            for op, rate in ops:
                jump = op * phase
                out += rate * (jump @ rho @ jump.conj().T)
            return out.ravel()

    return rhs


def _time_grid(t_final: float, times: Sequence[float] | None) -> np.ndarray:
    if not np.isfinite(t_final) or t_final < 0.0:
        raise ValueError(f"t_final must be a finite non-negative duration, got {t_final}")
    if times is None:
        return np.array([0.0, t_final]) if t_final > 0 else np.array([0.0])
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("times must be a non-empty 1D grid")
    if np.any(np.diff(grid) < 0) or grid[0] < 0 or grid[-1] > t_final * (1 + 1e-12):
        raise ValueError("times must be sorted and lie in [0, t_final]")
    return np.minimum(grid, t_final)


def _integrate(rhs, y0, t_final, grid, rtol, atol, first_step):
    """Run DOP853 and return (states along grid, info); grid[0] may be 0."""
    if t_final == 0.0:
        return np.repeat(y0[None, :], grid.size, axis=0), {"nfev": 0, "status": 0}
    sol = solve_ivp(
        rhs,
        (0.0, t_final),
        y0,
        method="DOP853",
        t_eval=grid,
        rtol=rtol,
        atol=atol,
        first_step=min(first_step, t_final),
    )
    if sol.status == -1:
        reached = sol.t[-1] if sol.t.size else 0.0
        raise StiffnessError(f"integration failed near t = {reached:.6g} ns of {t_final:.6g} ns: {sol.message}")
    return sol.y.T, {"nfev": int(sol.nfev), "status": int(sol.status)}


def _record(record: Mapping[str, Observable] | None, times, states):
    out = {}
    for name, obs in (record or {}).items():
        values = np.empty(times.size)
        for i, (t, state) in enumerate(zip(times, states)):
            if isinstance(obs, OperatorMatrix):
                values[i] = expectation(state, obs)
            else:
                values[i] = float(obs(t, state))
        out[name] = values
    return out


# ---------------------------------------------------------------------------
# Public propagators


def propagate_schrodinger(
    H: TimeDependentHamiltonian,
    psi0: StateVector,
    t_final: float,
    record: Mapping[str, Observable] | None = None,
    times: Sequence[float] | None = None,
    rtol: float = SCHRODINGER_RTOL,
    atol: float | None = None,
    frame: OperatorMatrix | None = None,
    first_step: float = FIRST_STEP,
) -> PropagationResult:
    """Solve d psi/dt = -i H(t) psi from t = 0 to ``t_final`` (ns).

    Parameters
    ----------
    record : mapping name -> OperatorMatrix or callable(t, psi) -> float
        Observables evaluated on the lab-frame state at every grid time.
    times : increasing grid in [0, t_final]; defaults to ``[0, t_final]``.
    frame : static operator H0 for interaction-picture integration.

    Raises
    ------
    StiffnessError
        If the adaptive step size underflows.
    AccuracyError
        If the norm drifts by more than 1e-5.
    """
    if psi0.space != H.space:
        raise DimensionError("initial state and Hamiltonian live on different spaces")
    grid = _time_grid(t_final, times)
    states, info = propagate_kets(H, psi0.data[:, None], t_final, grid, rtol, atol, frame, first_step)
    states = states[:, :, 0]
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if drift > TRACE_DRIFT_LIMIT:
        raise AccuracyError(f"state norm drifted by {drift:.3g}")
    info["max_norm_drift"] = drift
    return PropagationResult(H.space, grid, states, _record(record, grid, states), info)


def propagate_kets(
    H: TimeDependentHamiltonian,
    kets: np.ndarray,
    t_final: float,
    times: Sequence[float] | None = None,
    rtol: float = SCHRODINGER_RTOL,
    atol: float | None = None,
    frame: OperatorMatrix | None = None,
    first_step: float = FIRST_STEP,
):
    """Propagate the columns of ``kets`` (dim x k) together.

    Returns ``(states, info)`` with states of shape ``(n_times, dim, k)`` in
    the lab frame. Passing the identity gives the propagator U(t).
    """
    kets = np.asarray(kets, dtype=complex)
    if kets.ndim != 2 or kets.shape[0] != H.dim:
        raise DimensionError(f"expected a ({H.dim}, k) array of kets, got {kets.shape}")
    grid = _time_grid(t_final, times)
    atol = rtol * 1e-2 if atol is None else atol
    fr = _Frame(H, frame) if frame is not None else None
    y0 = fr.ket_from_lab(kets) if fr is not None else kets
    rhs = _schrodinger_rhs(H, fr, kets.shape)
    flat, info = _integrate(rhs, y0.ravel(), t_final, grid, rtol, atol, first_step)
    states = flat.reshape((grid.size,) + kets.shape)
    if fr is not None:
        states = np.stack([fr.ket_to_lab(t, s) for t, s in zip(grid, states)])
    info.update(method="DOP853", rtol=rtol, atol=atol, frame=frame is not None)
    return states, info


def propagate_lindblad(
    model: LindbladModel,
    rho0: DensityMatrix | StateVector,
    t_final: float,
    record: Mapping[str, Observable] | None = None,
    times: Sequence[float] | None = None,
    rtol: float = LINDBLAD_RTOL,
    atol: float | None = None,
    frame: OperatorMatrix | None = None,
    first_step: float = FIRST_STEP,
) -> PropagationResult:
    """Integrate the master equation of ``model`` from ``rho0``.

    Arguments as in :func:`propagate_schrodinger`; a pure ``StateVector``
    is accepted and converted to its projector.

    Raises
    ------
    StiffnessError
        If the adaptive step size underflows.
    AccuracyError
        If tr(rho) drifts from 1 by more than 1e-5.
    """
    if isinstance(rho0, StateVector):
        rho0 = rho0.density_matrix()
    if rho0.space != model.space:
        raise DimensionError("initial state and model live on different spaces")
    grid = _time_grid(t_final, times)
    states, info = propagate_operators(model, rho0.data[None], t_final, grid, rtol, atol, frame, first_step)
    states = states[:, 0]
    return PropagationResult(model.space, grid, states, _record(record, grid, states), info)


def propagate_operators(
    model: LindbladModel,
    operators: np.ndarray,
    t_final: float,
    times: Sequence[float] | None = None,
    rtol: float = LINDBLAD_RTOL,
    atol: float | None = None,
    frame: OperatorMatrix | None = None,
    first_step: float = FIRST_STEP,
):
    """Apply the master-equation flow to a batch of operators ``(k, dim, dim)``.

    The flow is linear, so it can be applied to any operator, e.g. the
    coherences |i><j| used to assemble a process map. Returns
    ``(states, info)`` with states of shape ``(n_times, k, dim, dim)``.

    Raises
    ------
    AccuracyError
        If the trace of any operator drifts by more than 1e-5.
    """
    operators = np.asarray(operators, dtype=complex)
    d = model.space.dim
    if operators.ndim != 3 or operators.shape[1:] != (d, d):
        raise DimensionError(f"expected a (k, {d}, {d}) batch, got {operators.shape}")
    grid = _time_grid(t_final, times)
    atol = rtol * 1e-2 if atol is None else atol
    fr = _Frame(model.hamiltonian, frame) if frame is not None else None
    y0 = np.stack([fr.rho_from_lab(op) for op in operators]) if fr is not None else operators
    rhs = _lindblad_rhs(model, fr, operators.shape)
    flat, info = _integrate(rhs, y0.ravel(), t_final, grid, rtol, atol, first_step)
    states = flat.reshape((grid.size,) + operators.shape)
    if fr is not None:
        states = np.stack([[fr.rho_to_lab(t, s) for s in batch] for t, batch in zip(grid, states)])
    traces = np.einsum("tkii->tk", states)
    drift = float(np.max(np.abs(traces - np.trace(operators, axis1=1, axis2=2)[None, :])))
    if drift > TRACE_DRIFT_LIMIT:
        raise AccuracyError(f"trace drifted by {drift:.3g} (limit {TRACE_DRIFT_LIMIT:g}); tighten rtol")
    info.update(method="DOP853", rtol=rtol, atol=atol, frame=frame is not None, max_trace_drift=drift)
    return states, info


# ---------------------------------------------------------------------------
# Superoperator oracle for static models


def lindblad_generator(model: LindbladModel) -> np.ndarray:
    """Matrix of the master-equation generator acting on row-major vec(rho).

    Built term by term from the dissipator A rho A^dag - {A^dag A, rho}/2 using
    vec(A rho B) = (A kron B^T) vec(rho). Only static models are allowed.
    """
    H = model.hamiltonian
    if not H.is_static:
        raise ValueError("lindblad_generator needs a static Hamiltonian")
    h = np.asarray(H.static.data)
    eye = np.eye(H.dim)
    generator = 1j * (np.kron(eye, h.T) - np.kron(h, eye))
    for op, rate in model.collapses:
        a = np.asarray(op.data)
        ada = a.conj().T @ a
        generator = generator + 0.5 * rate * (2.0 * np.kron(a, a.conj()) - np.kron(ada, eye) - np.kron(eye, ada.T))
    return generator


def superoperator_propagator(model: LindbladModel, t: float) -> np.ndarray:
    """exp(L t) for a static model, by dense scaling-and-squaring."""
    return scipy.linalg.expm(lindblad_generator(model) * t)


def evolve_superoperator(model: LindbladModel, rho0: DensityMatrix, t: float) -> np.ndarray:
    d = model.space.dim
    return (superoperator_propagator(model, t) @ np.asarray(rho0.data).ravel()).reshape(d, d)


# ---------------------------------------------------------------------------
# Observables


def expectation(state, op) -> float:
    """Re <psi|op|psi> for a ket, Re tr(rho op) for a density matrix."""
    data = np.asarray(state)
    matrix = np.asarray(op)
    if data.shape[0] != matrix.shape[0]:
        raise DimensionError("state and operator dimensions differ")
    if data.ndim == 1:
        return float(np.real(data.conj() @ matrix @ data))
    return float(np.real(np.einsum("ij,ji->", data, matrix)))


def populations(state, basis: Sequence[StateVector] | np.ndarray) -> np.ndarray:
    """<v|rho|v> (or |<v|psi>|^2) for each basis vector v."""
    data = np.asarray(state)
    vectors = np.column_stack([np.asarray(v) for v in basis]) if not isinstance(basis, np.ndarray) else basis
    if vectors.shape[0] != data.shape[0]:
        raise DimensionError("basis vectors and state dimensions differ")
    if data.ndim == 1:
        return np.abs(vectors.conj().T @ data) ** 2
    return np.real(np.einsum("ik,ij,jk->k", vectors.conj(), data, vectors))


def trace_distance(a, b) -> float:
    """0.5 * || a - b ||_1 for density matrices (or kets, via projectors)."""
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    if b.ndim == 1:
        b = np.outer(b, b.conj())
    diff = a - b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
