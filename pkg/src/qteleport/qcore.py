"""Exact complex linear algebra for small qubit registers.

Qubit 0 is the leftmost tensor factor: in basis index ``k`` of an n-qubit
register, qubit ``q`` is bit ``n - 1 - q`` of ``k``.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GATE_NAMES",
    "EXACT_TOL",
    "PIPELINE_TOL",
    "StateVector",
    "Gate",
    "DensityMatrix",
    "BlochVector",
    "standard_gate",
    "basis_state",
    "tensor",
    "apply_1q",
    "apply_cnot",
    "probabilities",
    "density_from_state",
    "partial_trace",
    "bloch_vector",
    "fidelity_pure",
    "equal_up_to_global_phase",
]

EXACT_TOL = 1e-12
PIPELINE_TOL = 1e-10

GATE_NAMES = ("I", "X", "Y", "Z", "H", "S", "T", "CNOT")

_SQRT1_2 = 1.0 / math.sqrt(2.0)

_MATRICES = {
    "I": [[1, 0], [0, 1]],
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -1j], [1j, 0]],
    "Z": [[1, 0], [0, -1]],
    "H": [[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]],
    "S": [[1, 0], [0, 1j]],
    "T": [[1, 0], [0, cmath.exp(1j * math.pi / 4)]],
    # no 1/sqrt(2) prefactor: with it the matrix is not unitary
    "CNOT": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
}


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _check_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{what} contains NaN or Inf entries")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``n_qubits`` qubits.

    ``amps`` is a read-only complex128 array of length ``2**n_qubits``.
    """

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        size = amps.size
        if size < 2 or size & (size - 1):
            raise ValueError(f"amplitude count {size} is not a power of two >= 2")
        _check_finite(amps, "state")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > PIPELINE_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
        object.__setattr__(self, "amps", _frozen(amps))

    @classmethod
    def _owned(cls, amps: np.ndarray) -> "StateVector":
        # amps is a fresh complex128 vector produced by a kernel; skip the copy
        norm2 = float(np.vdot(amps, amps).real)
        if not abs(norm2 - 1.0) <= PIPELINE_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
        obj = object.__new__(cls)
        object.__setattr__(obj, "amps", _frozen(amps))
        return obj

    @classmethod
    def from_amplitudes(cls, amps, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0 or not np.isfinite(norm):
                raise ValueError("cannot normalize a zero or non-finite vector")
            amps = amps / norm
        return cls(amps)

    @property
    def n_qubits(self) -> int:
        return self.amps.size.bit_length() - 1

    def __len__(self) -> int:
        return self.amps.size

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits}, amps={self.amps!r})"


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"gate matrix must be 2x2 or 4x4, got {matrix.shape}")
        _check_finite(matrix, f"gate {self.name}")
        defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
        if defect > EXACT_TOL:
            raise ValueError(f"gate {self.name} is not unitary (defect {defect:.3e})")
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def arity(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    elems: np.ndarray

    def __post_init__(self):
        elems = np.array(self.elems, dtype=np.complex128)
        dim = elems.shape[0] if elems.ndim == 2 else 0
        if elems.ndim != 2 or elems.shape != (dim, dim) or dim < 2 or dim & (dim - 1):
            raise ValueError(f"density matrix must be square 2^n x 2^n, got {elems.shape}")
        _check_finite(elems, "density matrix")
        if np.max(np.abs(elems - elems.conj().T)) > PIPELINE_TOL:
            raise ValueError("density matrix is not Hermitian")
        trace = np.trace(elems)
        if abs(trace - 1.0) > PIPELINE_TOL:
            raise ValueError(f"density matrix trace is {trace!r}, expected 1")
        if np.min(np.linalg.eigvalsh(elems)) < -1e-9:
            raise ValueError("density matrix has negative eigenvalues")
        object.__setattr__(self, "elems", _frozen(elems))

    @property
    def n_qubits(self) -> int:
        return self.elems.shape[0].bit_length() - 1

    def purity(self) -> float:
        return float(np.real(np.trace(self.elems @ self.elems)))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def standard_gate(name: str) -> Gate:
    """Return one of the eight supported gates by (case-insensitive) name.

    >>> standard_gate("x").matrix.real.astype(int).tolist()
    [[0, 1], [1, 0]]
    """
    key = str(name).upper()
    if key == "CX":
        key = "CNOT"
    if key not in _MATRICES:
        raise ValueError(f"unknown gate {name!r}; expected one of {', '.join(GATE_NAMES)}")
    return _gate(key)


@functools.lru_cache(maxsize=None)
def _gate(key: str) -> Gate:
    return Gate(key, _MATRICES[key])


def basis_state(bits: str) -> StateVector:
    """Computational basis state from a bitstring, qubit 0 first."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amps, b.amps))


def _check_qubit(state: StateVector, qubit: int, what: str = "qubit") -> int:
    n = state.n_qubits
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < n:
        raise IndexError(f"{what} index {qubit!r} out of range for {n}-qubit state")
    return int(qubit)


def _split(amps: np.ndarray, n: int, qubit: int) -> tuple[np.ndarray, np.ndarray]:
    # view as (high, bit, low); qubit q sits at bit position n-1-q
    view = amps.reshape(2**qubit, 2, 2 ** (n - 1 - qubit))
    return view[:, 0, :], view[:, 1, :]


def apply_1q(state: StateVector, g: Gate, target: int) -> StateVector:
    """Apply a single-qubit gate to ``target``; returns a new state.

    Works on a single copy of the amplitudes through strided views, with
    shortcuts for diagonal and X-type gates.
    """
    if g.arity != 1:
        raise ValueError(f"gate {g.name} is not a single-qubit gate")
    target = _check_qubit(state, target, "target")
    out = state.amps.copy()
    a0, a1 = _split(out, state.n_qubits, target)
    (u00, u01), (u10, u11) = g.matrix
    if u01 == 0 and u10 == 0:
        if u00 != 1:
            a0 *= u00
        if u11 != 1:
            a1 *= u11
    elif u00 == 0 and u11 == 0:
        tmp = a0.copy()
        a0[...] = u01 * a1
        a1[...] = u10 * tmp
    else:
        tmp = a0.copy()
        a0 *= u00
        a0 += u01 * a1
        a1 *= u11
        a1 += u10 * tmp
    return StateVector._owned(out)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    control = _check_qubit(state, control, "control")
    target = _check_qubit(state, target, "target")
    if control == target:
        raise ValueError("CNOT control and target must differ")
    n = state.n_qubits
    out = state.amps.copy()
    view = out.reshape([2] * n)
    hit = [slice(None)] * n
    hit[control] = 1
    # after fixing the control axis the target axis shifts down by one if it was later
    t_axis = target - 1 if target > control else target
    sub = view[tuple(hit)]
    sub[...] = np.flip(sub, axis=t_axis).copy()
    return StateVector._owned(out)


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amps) ** 2


def density_from_state(state: StateVector) -> DensityMatrix:
    return DensityMatrix(np.outer(state.amps, state.amps.conj()))


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduced 2x2 density matrix of qubit ``keep``."""
    n = rho.n_qubits
    if not isinstance(keep, (int, np.integer)) or not 0 <= keep < n:
        raise IndexError(f"qubit index {keep!r} out of range for {n}-qubit density matrix")
    t = rho.elems.reshape(2**keep, 2, 2 ** (n - 1 - keep), 2**keep, 2, 2 ** (n - 1 - keep))
    return DensityMatrix(np.einsum("aibajb->ij", t))


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def bloch_vector(rho: DensityMatrix) -> BlochVector:
    if rho.n_qubits != 1:
        raise ValueError(f"Bloch vector needs a 1-qubit density matrix, got {rho.n_qubits} qubits")
    e = rho.elems
    return BlochVector(*(float(np.real(np.trace(e @ p))) for p in (_PAULI_X, _PAULI_Y, _PAULI_Z)))


def fidelity_pure(theory: StateVector, rho: DensityMatrix) -> float:
    """Overlap <theory| rho |theory> of a target pure state with ``rho``."""
    if len(theory) != rho.elems.shape[0]:
        raise ValueError(f"dimension mismatch: state {len(theory)} vs density matrix {rho.elems.shape[0]}")
    return float(np.real(np.vdot(theory.amps, rho.elems @ theory.amps)))


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = EXACT_TOL) -> bool:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return bool(abs(np.vdot(a.amps, b.amps)) >= 1.0 - tol)
