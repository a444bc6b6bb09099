"""Dense complex linear algebra for few-qubit states and operators.

Bit convention used throughout the package: qubit 0 is the most significant
bit of the basis index, so a three-qubit ket reads |q0 q1 q2> and
index(|q0 q1 q2>) = 4*q0 + 2*q1 + q2.  For the simulator this means the two
system spins a, b occupy the high bits and the probe qubit c the lowest bit.

Everything here is a pure function of its inputs; instances are immutable and
safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

# Spin-1/2 operators I_alpha = sigma_alpha / 2.
SPIN_X = SIGMA_X / 2
SPIN_Y = SIGMA_Y / 2
SPIN_Z = SIGMA_Z / 2

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10

# Kronecker products beyond this dimension are refused (6 qubits).
MAX_TENSOR_DIM = 64


def _as_complex_array(values, shape_hint: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(arr.view(float))):
        raise ValueError(f"{shape_hint} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _as_complex_array(self.amplitudes, "state vector")
        if amps.ndim != 1 or amps.size != 2 ** self.n_qubits:
            raise ValueError(
                f"expected 2**{self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm!r} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, values, normalize: bool = False) -> "StateVector":
        amps = _as_complex_array(values, "state vector")
        n = int(round(np.log2(amps.size)))
        if 2 ** n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of 2")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(2 ** self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class OperatorMatrix:
    """Square complex matrix with a declared role used for validation."""

    dim: int
    entries: np.ndarray
    role: str = "general"

    def __post_init__(self):
        m = _as_complex_array(self.entries, "operator matrix")
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"expected shape ({self.dim}, {self.dim}), got {m.shape}")
        if self.role not in ("unitary", "hermitian", "general"):
            raise ValueError(f"unknown operator role {self.role!r}")
        if self.role == "unitary":
            dev = np.max(np.abs(m.conj().T @ m - np.eye(self.dim)))
            if dev > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
        elif self.role == "hermitian":
            dev = np.max(np.abs(m - m.conj().T))
            if dev > HERMITIAN_TOL:
                raise ValueError(f"matrix is not Hermitian (deviation {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def hermitian(cls, entries) -> "OperatorMatrix":
        m = np.asarray(entries, dtype=complex)
        return cls(m.shape[0], m, "hermitian")

    @classmethod
    def unitary(cls, entries) -> "OperatorMatrix":
        m = np.asarray(entries, dtype=complex)
        return cls(m.shape[0], m, "unitary")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = _as_complex_array(self.entries, "density matrix")
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"expected shape ({self.dim}, {self.dim}), got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} is not 1")
        if np.linalg.eigvalsh(m).min() < -POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))


def tensor_product(a, b, max_dim: int = MAX_TENSOR_DIM):
    """Kronecker product of two states or two operators.

    The left factor occupies the most significant qubits of the result, so
    tensor_product(|q_a>, |q_b>) indexes as |q_a q_b>.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        dim = 2 ** (a.n_qubits + b.n_qubits)
        if dim > max_dim:
            raise ValueError(f"tensor product dimension {dim} exceeds limit {max_dim}")
        return StateVector(a.n_qubits + b.n_qubits, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, OperatorMatrix) and isinstance(b, OperatorMatrix):
        dim = a.dim * b.dim
        if dim > max_dim:
            raise ValueError(f"tensor product dimension {dim} exceeds limit {max_dim}")
        role = a.role if a.role == b.role and a.role != "general" else "general"
        return OperatorMatrix(dim, np.kron(a.entries, b.entries), role)
    raise TypeError("tensor_product expects two StateVector or two OperatorMatrix values")


def expm_hermitian(h: OperatorMatrix, t: float) -> OperatorMatrix:
    """Unitary e^{-i h t} computed by eigendecomposition (exact at these dims)."""
    m = h.entries
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValueError("expm_hermitian requires a Hermitian generator")
    w, v = np.linalg.eigh(m)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return OperatorMatrix(h.dim, u, "unitary")


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix over the kept qubit indices (ascending order)."""
    keep = sorted(set(keep))
    n = rho.n_qubits
    if not keep:
        raise ValueError("partial_trace requires a non-empty keep set")
    if any(q < 0 or q >= n for q in keep):
        raise ValueError(f"keep set {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    tensor = rho.entries.reshape([2] * (2 * n))
    for offset, q in enumerate(traced):
        ax = q - offset  # axes shift left after each trace
        tensor = np.trace(tensor, axis1=ax, axis2=ax + tensor.ndim // 2)
    d = 2 ** len(keep)
    return DensityMatrix(d, tensor.reshape(d, d))
