"""
Single-qubit unitaries and layers of them applied across a register.
"""
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from uqsim_backend.errors import NonUnitaryError, SizeMismatchError, UsageError
from .paulis import PAULI_MATRICES

UNITARITY_TOL = 1e-12

_AXES = {'x': (1.0, 0.0, 0.0), 'y': (0.0, 1.0, 0.0), 'z': (0.0, 0.0, 1.0)}
_SIGMAS = (PAULI_MATRICES['X'], PAULI_MATRICES['Y'], PAULI_MATRICES['Z'])


@dataclass(frozen=True)
class SingleQubitUnitary:
    """2×2 unitary stored as a row-major tuple of four complex entries."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(complex(e) for e in self.entries)
        if len(entries) != 4:
            raise UsageError('A single-qubit unitary needs exactly 4 entries')
        if not all(math.isfinite(e.real) and math.isfinite(e.imag) for e in entries):
            raise NonUnitaryError('Unitary entries must be finite')
        object.__setattr__(self, 'entries', entries)
        m = self.matrix
        deviation = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if deviation > UNITARITY_TOL:
            raise NonUnitaryError(f'Matrix is not unitary (max |U†U - 1| = {deviation:.3e})')

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise UsageError(f'Expected a 2x2 matrix, got shape {matrix.shape}')
        return cls(tuple(matrix.reshape(-1)))

    @classmethod
    def identity(cls):
        return cls((1, 0, 0, 1))

    @classmethod
    def rotation(cls, axis, angle):
        """exp(-i·angle·(n·σ)) for a unit axis given as 'x'/'y'/'z' or a 3-vector."""
        n = np.asarray(_AXES[axis] if isinstance(axis, str) else axis, dtype=float)
        generator = sum(c * s for c, s in zip(n, _SIGMAS))
        return cls.from_matrix(math.cos(angle) * np.eye(2) - 1j * math.sin(angle) * generator)

    @classmethod
    def pauli(cls, label):
        return cls.from_matrix(PAULI_MATRICES[label])

    @property
    def matrix(self):
        return np.array(self.entries, dtype=complex).reshape(2, 2)

    def dagger(self):
        return SingleQubitUnitary.from_matrix(self.matrix.conj().T)

    def __matmul__(self, other):
        return SingleQubitUnitary.from_matrix(self.matrix @ other.matrix)

    def is_identity(self, tol=UNITARITY_TOL):
        return bool(np.max(np.abs(self.matrix - np.eye(2))) <= tol)

    def axis_angle(self):
        """Return (alpha, theta, n) with U = e^{iα}·exp(-iθ(n·σ)), θ in [0, π]."""
        m = self.matrix
        alpha = 0.5 * np.angle(np.linalg.det(m))
        w = m * np.exp(-1j * alpha)
        cos_theta = float(np.clip(0.5 * np.trace(w).real, -1.0, 1.0))
        # w - w† = -2i sinθ (n·σ)
        anti = 0.5j * (w - w.conj().T)
        v = np.array([0.5 * np.trace(s @ anti).real for s in _SIGMAS])
        sin_theta = float(np.linalg.norm(v))
        theta = math.atan2(sin_theta, cos_theta)
        if sin_theta < 1e-15:
            return float(alpha), theta, np.array([0.0, 0.0, 1.0])
        return float(alpha), theta, v / sin_theta

    def scaled(self, factor):
        """Same axis and global phase with the rotation angle multiplied by ``factor``."""
        alpha, theta, n = self.axis_angle()
        rotated = SingleQubitUnitary.rotation(n, theta * factor).matrix
        return SingleQubitUnitary.from_matrix(np.exp(1j * alpha) * rotated)

    def conjugation_matrix(self):
        """Real 3×3 R with U σ_j U† = Σ_i R[i, j] σ_i (columns/rows ordered x, y, z)."""
        m = self.matrix
        r = np.empty((3, 3))
        for j, sj in enumerate(_SIGMAS):
            image = m @ sj @ m.conj().T
            for i, si in enumerate(_SIGMAS):
                r[i, j] = 0.5 * np.trace(si @ image).real
        return r


# (1 - iσx)/√2, (1 - iσy)/√2 and friends used by the published sequences
SQRT_X = SingleQubitUnitary.rotation('x', math.pi / 4)
SQRT_X_DAG = SingleQubitUnitary.rotation('x', -math.pi / 4)
SQRT_Y = SingleQubitUnitary.rotation('y', math.pi / 4)
SQRT_Y_DAG = SingleQubitUnitary.rotation('y', -math.pi / 4)


@dataclass(frozen=True)
class LocalLayer:
    """One single-qubit unitary per qubit, applied simultaneously.

    ``is_homogeneous`` marks layers produced by a single beam acting equally on
    every qubit; such layers carry ``n_qubits`` copies of the same unitary.
    """

    unitaries: tuple
    is_homogeneous: bool = False

    def __post_init__(self):
        unitaries = tuple(self.unitaries)
        if not unitaries:
            raise UsageError('A local layer needs at least one qubit')
        if self.is_homogeneous and any(u != unitaries[0] for u in unitaries):
            raise UsageError('Homogeneous layer must apply the same unitary to every qubit')
        object.__setattr__(self, 'unitaries', unitaries)

    @classmethod
    def homogeneous(cls, unitary, n_qubits):
        return cls((unitary,) * n_qubits, True)

    @classmethod
    def inhomogeneous(cls, unitaries):
        return cls(tuple(unitaries), False)

    @classmethod
    def identity(cls, n_qubits):
        return cls.homogeneous(SingleQubitUnitary.identity(), n_qubits)

    @classmethod
    def on_qubits(cls, n_qubits, assignment):
        """Inhomogeneous layer with {qubit: unitary} and identity elsewhere."""
        unitaries = [SingleQubitUnitary.identity()] * n_qubits
        for qubit, unitary in assignment.items():
            unitaries[qubit] = unitary
        return cls.inhomogeneous(unitaries)

    @property
    def n_qubits(self):
        return len(self.unitaries)

    def unitary(self, qubit):
        return self.unitaries[qubit]

    def dagger(self):
        return LocalLayer(tuple(u.dagger() for u in self.unitaries), self.is_homogeneous)

    def then(self, other):
        """Layer equal to applying ``self`` first and ``other`` afterwards."""
        if other.n_qubits != self.n_qubits:
            raise SizeMismatchError(f'Cannot merge layers on {self.n_qubits} and {other.n_qubits} qubits')
        merged = tuple(b @ a for a, b in zip(self.unitaries, other.unitaries))
        return LocalLayer(merged, self.is_homogeneous and other.is_homogeneous)

    def is_identity(self, tol=UNITARITY_TOL):
        return all(u.is_identity(tol) for u in self.unitaries)

    def uniform(self):
        """True when every qubit gets the same unitary, whatever the flag says."""
        return all(u == self.unitaries[0] for u in self.unitaries)

    def to_matrix(self):
        return reduce(np.kron, [u.matrix for u in reversed(self.unitaries)])
