"""Dense operator algebra on explicitly structured finite Hilbert spaces.

Every operator carries the :class:`HilbertSpace` it acts on, so tensor
embedding and partial traces can be done by factor label instead of by
positional bookkeeping. Arrays are stored read-only; all objects here are
immutable and can be shared between workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError

HERMITIAN_RTOL = 1e-12


def _frozen(array, dtype=complex):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of labelled factors.

    Parameters
    ----------
    factors : sequence of (label, dimension)
        Factor order fixes the Kronecker ordering: the first factor is the
        most significant index.
    """

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        if not factors:
            raise DimensionError("a Hilbert space needs at least one factor")
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"factor labels must be unique, got {labels}")
        for label, dim in factors:
            if dim < 1:
                raise DimensionError(f"factor {label!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def single(cls, label: str, dim: int) -> HilbertSpace:
        return cls(((label, dim),))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"no factor labelled {label!r} in {self.labels}") from None

    def factor_dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def basis_index(self, levels: Sequence[int]) -> int:
        """Flat index of the product basis state with the given per-factor levels."""
        if len(levels) != len(self.dims):
            raise DimensionError(f"expected {len(self.dims)} levels, got {len(levels)}")
        return int(np.ravel_multi_index(tuple(levels), self.dims))

    def __str__(self):
        return " x ".join(f"{label}[{dim}]" for label, dim in self.factors)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex square matrix tagged with its Hilbert space.

    ``hermitian=True`` asserts Hermiticity at construction time
    (``max|A - A^dag| <= 1e-12 * max|A|``).
    """

    space: HilbertSpace
    data: np.ndarray
    hermitian: bool = False

    # numpy scalars must defer to __rmul__ instead of converting via __array__
    __array_ufunc__ = None

    def __post_init__(self):
        data = _frozen(self.data)
        n = self.space.dim
        if data.shape != (n, n):
            raise DimensionError(f"operator of shape {data.shape} does not fit space {self.space} (dim {n})")
        object.__setattr__(self, "data", data)
        if self.hermitian and not is_hermitian(data):
            raise DimensionError("operator flagged hermitian is not Hermitian")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    @property
    def dim(self) -> int:
        return self.space.dim

    def dag(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.data.conj().T, self.hermitian)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        return is_hermitian(self.data, rtol)

    def _check(self, other: OperatorMatrix):
        if other.space != self.space:
            raise DimensionError(f"space mismatch: {self.space} vs {other.space}")

    def __add__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(self.space, self.data + other.data, self.hermitian and other.hermitian)

    def __sub__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(self.space, self.data - other.data, self.hermitian and other.hermitian)

    def __neg__(self):
        return OperatorMatrix(self.space, -self.data, self.hermitian)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        real = np.isreal(scalar)
        return OperatorMatrix(self.space, scalar * self.data, self.hermitian and bool(real))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.space, self.data @ other.data)
        if isinstance(other, StateVector):
            self._check_state(other)
            return self.data @ other.data
        return NotImplemented

    def _check_state(self, state):
        if state.space != self.space:
            raise DimensionError(f"space mismatch: {self.space} vs {state.space}")

    def matrix_element(self, bra: StateVector, ket: StateVector) -> complex:
        return complex(bra.data.conj() @ self.data @ ket.data)

    @classmethod
    def zeros(cls, space: HilbertSpace) -> OperatorMatrix:
        return cls(space, np.zeros((space.dim, space.dim)), hermitian=True)

    @classmethod
    def identity(cls, space: HilbertSpace) -> OperatorMatrix:
        return cls(space, np.eye(space.dim), hermitian=True)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state (norm 1 within 1e-10)."""

    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = _frozen(self.data)
        if data.shape != (self.space.dim,):
            raise DimensionError(f"state of shape {data.shape} does not fit space {self.space}")
        norm = np.linalg.norm(data)
        if abs(norm - 1.0) > 1e-10:
            raise DimensionError(f"state vector is not normalized (norm {norm:.12g})")
        object.__setattr__(self, "data", data)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    @classmethod
    def basis(cls, space: HilbertSpace, levels: Sequence[int]) -> StateVector:
        vec = np.zeros(space.dim, dtype=complex)
        vec[space.basis_index(levels)] = 1.0
        return cls(space, vec)

    @classmethod
    def normalized(cls, space: HilbertSpace, data) -> StateVector:
        data = np.asarray(data, dtype=complex)
        return cls(space, data / np.linalg.norm(data))

    def overlap(self, other: StateVector) -> complex:
        """<self|other>."""
        if other.space != self.space:
            raise DimensionError("space mismatch")
        return complex(self.data.conj() @ other.data)

    def projector(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, np.outer(self.data, self.data.conj()), hermitian=True)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.space, np.outer(self.data, self.data.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite state (tolerances 1e-8)."""

    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = _frozen(self.data)
        n = self.space.dim
        if data.shape != (n, n):
            raise DimensionError(f"density matrix of shape {data.shape} does not fit space {self.space}")
        if not is_hermitian(data, 1e-8):
            raise DimensionError("density matrix is not Hermitian")
        trace = np.trace(data).real
        if abs(trace - 1.0) > 1e-8:
            raise DimensionError(f"density matrix trace {trace:.12g} != 1")
        lowest = np.linalg.eigvalsh(0.5 * (data + data.conj().T))[0]
        if lowest < -1e-8:
            raise DimensionError(f"density matrix has negative eigenvalue {lowest:.3g}")
        object.__setattr__(self, "data", data)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> DensityMatrix:
        return cls(space, np.eye(space.dim) / space.dim)


def is_hermitian(matrix, rtol: float = HERMITIAN_RTOL) -> bool:
    matrix = np.asarray(matrix)
    scale = np.max(np.abs(matrix)) if matrix.size else 0.0
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(matrix - matrix.conj().T)) <= rtol * scale)


# ---------------------------------------------------------------------------
# Elementary operators


def annihilation(cutoff: int, label: str = "cavity") -> OperatorMatrix:
    """Bosonic annihilation operator truncated to ``cutoff`` Fock states.

    ``a[n-1, n] = sqrt(n)`` for ``1 <= n < cutoff``.
    """
    if cutoff < 2:
        raise DimensionError(f"Fock cutoff must be >= 2, got {cutoff}")
    return OperatorMatrix(HilbertSpace.single(label, cutoff), np.diag(np.sqrt(np.arange(1, cutoff)), 1))


@dataclass(frozen=True)
class TransmonOps:
    """Single-transmon operators on ``levels`` levels.

    ``lowering[j]`` is |j><j+1| and ``sigma_z[j]`` is |j+1><j+1| - |j><j| for
    each adjacent pair (j, j+1). ``ladder`` is the harmonic-ladder lowering
    operator sum_j sqrt(j+1)|j><j+1|. ``pauli_x``/``pauli_z`` are the
    two-level Pauli matrices on {|0>, |1>}, zero on any higher level.
    """

    levels: int
    lowering: tuple[OperatorMatrix, ...]
    sigma_z: tuple[OperatorMatrix, ...]
    projectors: tuple[OperatorMatrix, ...]
    ladder: OperatorMatrix
    pauli_x: OperatorMatrix
    pauli_z: OperatorMatrix

    @property
    def space(self) -> HilbertSpace:
        return self.ladder.space


def transmon_ops(levels: int, label: str = "transmon") -> TransmonOps:
    if levels not in (2, 3):
        raise DimensionError(f"transmon truncation must keep 2 or 3 levels, got {levels}")
    space = HilbertSpace.single(label, levels)

    def ket_bra(i, j):
        m = np.zeros((levels, levels))
        m[i, j] = 1.0
        return m

    lowering = tuple(OperatorMatrix(space, ket_bra(j, j + 1)) for j in range(levels - 1))
    sigma_z = tuple(
        OperatorMatrix(space, ket_bra(j + 1, j + 1) - ket_bra(j, j), hermitian=True) for j in range(levels - 1)
    )
    projectors = tuple(OperatorMatrix(space, ket_bra(j, j), hermitian=True) for j in range(levels))
    ladder = OperatorMatrix(space, np.diag(np.sqrt(np.arange(1, levels)), 1))
    pauli_x = OperatorMatrix(space, ket_bra(0, 1) + ket_bra(1, 0), hermitian=True)
    return TransmonOps(levels, lowering, sigma_z, projectors, ladder, pauli_x, sigma_z[0])


# ---------------------------------------------------------------------------
# Tensor structure


def tensor(*ops: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product; the resulting space concatenates the factors in order."""
    space = HilbertSpace(tuple(f for op in ops for f in op.space.factors))
    data = reduce(np.kron, (op.data for op in ops))
    return OperatorMatrix(space, data, all(op.hermitian for op in ops))


def embed(op: OperatorMatrix, target_space: HilbertSpace, factor_label: str) -> OperatorMatrix:
    """Lift a single-factor operator to ``I x ... x op x ... x I`` on ``target_space``."""
    position = target_space.index(factor_label)
    if op.dim != target_space.dims[position]:
        raise DimensionError(
            f"operator dimension {op.dim} does not match factor {factor_label!r} "
            f"of dimension {target_space.dims[position]}"
        )
    left = int(np.prod(target_space.dims[:position]))
    right = int(np.prod(target_space.dims[position + 1:]))
    data = np.kron(np.kron(np.eye(left), op.data), np.eye(right))
    return OperatorMatrix(target_space, data, op.hermitian)


def ket(space: HilbertSpace, **levels: int) -> StateVector:
    """Product basis state, e.g. ``ket(space, transmon=1, cavity=0)``."""
    missing = set(space.labels) - set(levels)
    if missing:
        raise DimensionError(f"levels missing for factors {sorted(missing)}")
    return StateVector.basis(space, [levels[label] for label in space.labels])


# ---------------------------------------------------------------------------
# Dressed states of the resonant Jaynes-Cummings unit


@dataclass(frozen=True)
class DressedBasis:
    """The logical dressed states |G>, |->, |+> and their energies (rad/ns)."""

    ground: StateVector
    minus: StateVector
    plus: StateVector
    energies: tuple[float, float, float]

    @property
    def states(self) -> tuple[StateVector, StateVector, StateVector]:
        return (self.ground, self.minus, self.plus)

    @property
    def names(self) -> tuple[str, str, str]:
        return ("G", "minus", "plus")

    def matrix(self) -> np.ndarray:
        """Columns |G>, |->, |+> as a (dim, 3) array."""
        return np.column_stack([s.data for s in self.states])


def dressed_basis(
    g0: float, omega_c: float, space: HilbertSpace, qubit: str = "transmon", cavity: str = "cavity"
) -> DressedBasis:
    """Lowest dressed states of a resonant transmon-resonator unit.

    |G> = |0>_q|0>_c and |+-> = (|0>_q|1>_c +- |1>_q|0>_c)/sqrt(2), with
    energies 0 and omega_c +- g0 measured from |G>.
    """
    for label in (qubit, cavity):
        if label not in space.labels:
            raise DimensionError(f"space {space} lacks the required factor {label!r}")
    if space.factor_dim(cavity) < 2:
        raise DimensionError("the cavity factor must keep at least two Fock states")
    others = {label: 0 for label in space.labels}
    g = ket(space, **others)
    photon = ket(space, **{**others, cavity: 1}).data
    excitation = ket(space, **{**others, qubit: 1}).data
    minus = StateVector(space, (photon - excitation) / np.sqrt(2.0))
    plus = StateVector(space, (photon + excitation) / np.sqrt(2.0))
    return DressedBasis(g, minus, plus, (0.0, omega_c - g0, omega_c + g0))


# ---------------------------------------------------------------------------
# Matrix functions


def matrix_exponential(op: OperatorMatrix | np.ndarray):
    """exp(A) for a square operator.

    Hermitian input, and anti-Hermitian input ``-iH`` (propagators), go
    through the eigendecomposition of the Hermitian matrix, which keeps
    propagators unitary to rounding. Anything else uses scipy's
    scaling-and-squaring Pade algorithm.
    """
    data = np.asarray(op, dtype=complex)
    if not np.all(np.isfinite(data)):
        raise ValueError("matrix_exponential: non-finite entries")
    if is_hermitian(data):
        energies, vectors = np.linalg.eigh(0.5 * (data + data.conj().T))
        result = (vectors * np.exp(energies)) @ vectors.conj().T
    elif is_hermitian(1j * data):
        herm = 1j * data
        energies, vectors = np.linalg.eigh(0.5 * (herm + herm.conj().T))
        result = (vectors * np.exp(-1j * energies)) @ vectors.conj().T
    else:
        result = scipy.linalg.expm(data)
    if isinstance(op, OperatorMatrix):
        return OperatorMatrix(op.space, result)
    return result


def partial_trace(rho: DensityMatrix | np.ndarray, keep: Iterable[str], space: HilbertSpace | None = None):
    """Trace out every factor not listed in ``keep``.

    Accepts a :class:`DensityMatrix` (returns one) or a raw array together
    with its ``space`` (returns an array). Kept factors retain their
    original order.
    """
    if isinstance(rho, DensityMatrix):
        space, data, wrap = rho.space, rho.data, True
    else:
        if space is None:
            raise DimensionError("partial_trace on a raw array needs its HilbertSpace")
        data, wrap = np.asarray(rho), False
    keep = list(keep)
    for label in keep:
        space.index(label)
    keep_idx = sorted(space.index(label) for label in keep)
    n = len(space.dims)
    tensor_ = data.reshape(space.dims + space.dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(n)]
    col = [letters[i] if i not in keep_idx else letters[n + i] for i in range(n)]
    out = [letters[i] for i in keep_idx] + [letters[n + i] for i in keep_idx]
    reduced = np.einsum("".join(row) + "".join(col) + "->" + "".join(out), tensor_)
    sub_dims = [space.dims[i] for i in keep_idx]
    sub_dim = int(np.prod(sub_dims))
    reduced = reduced.reshape(sub_dim, sub_dim)
    if wrap:
        sub_space = HilbertSpace(tuple(space.factors[i] for i in keep_idx))
        return DensityMatrix(sub_space, reduced)
    return reduced
