"""
Exact reference: dense diagonalisation, evolution, ground spaces and
eigenspace weights.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import linalg

from avg_compiler.schedule import ApplyLocal
from uqsim_backend.errors import DenseCapExceeded, NumericFailure, SizeMismatchError
from .state import StateVector, subspace_fidelity, zz_phase_exponent

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-9
ORTHONORMALITY_TOL = 1e-9
GROUND_SUPPORT_TOL = 1e-12


def check_dense_cap(n_qubits):
    cap = settings.UQS_DENSE_CAP
    if n_qubits > cap:
        raise DenseCapExceeded(f'{n_qubits} qubits exceeds the dense oracle cap of {cap} (UQS_DENSE_CAP)')


@dataclass(frozen=True)
class SpectrumCache:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    groups: tuple
    tol: float = DEGENERACY_TOL

    @classmethod
    def from_hamiltonian(cls, h, tol=DEGENERACY_TOL):
        check_dense_cap(h.n_qubits)
        return cls.from_matrix(h.to_matrix(), tol)

    @classmethod
    def from_matrix(cls, matrix, tol=DEGENERACY_TOL):
        eigenvalues, eigenvectors = linalg.eigh(matrix)
        gram = eigenvectors.conj().T @ eigenvectors
        deviation = float(np.max(np.abs(gram - np.eye(len(eigenvalues)))))
        if deviation > ORTHONORMALITY_TOL:
            raise NumericFailure(f'Eigenvectors lost orthonormality ({deviation:.3e})')
        groups, start = [], 0
        for k in range(1, len(eigenvalues) + 1):
            if k == len(eigenvalues) or eigenvalues[k] - eigenvalues[k - 1] >= tol:
                groups.append((start, k))
                start = k
        return cls(eigenvalues, eigenvectors, tuple(groups), tol)

    @property
    def n_qubits(self):
        return len(self.eigenvalues).bit_length() - 1

    def group_energy(self, index):
        start, stop = self.groups[index]
        return float(np.mean(self.eigenvalues[start:stop]))

    def group_basis(self, index):
        start, stop = self.groups[index]
        return self.eigenvectors[:, start:stop]

    def gap(self):
        """E₁ - E₀ between the two lowest distinct levels, None for a single level."""
        if len(self.groups) < 2:
            return None
        return self.group_energy(1) - self.group_energy(0)

    def evolve(self, amplitudes, t):
        v = self.eigenvectors
        return v @ (np.exp(-1j * self.eigenvalues * t) * (v.conj().T @ amplitudes))


def exact_evolve(h, t, state, cache=None):
    """e^{-iHt}ψ through the eigendecomposition of the dense matrix."""
    if state.n_qubits != h.n_qubits:
        raise SizeMismatchError(f'{h.n_qubits}-qubit Hamiltonian evolving a {state.n_qubits}-qubit state')
    cache = cache or SpectrumCache.from_hamiltonian(h)
    evolved = StateVector(cache.evolve(state.amplitudes, t), check_norm=False)
    evolved.check_norm()
    return evolved


def exact_unitary(h, t):
    check_dense_cap(h.n_qubits)
    eigenvalues, v = linalg.eigh(h.to_matrix())
    return (v * np.exp(-1j * eigenvalues * t)) @ v.conj().T


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: StateVector
    degeneracy: int
    basis: np.ndarray


def pick_ground_vector(basis):
    """Deterministic vector in the span of ``basis``.

    Takes the lowest basis index i the space reaches and returns the unit
    vector of the space with the largest |amplitude| at i, which is P|i>
    normalised. That amplitude is made real positive, and it is the first
    nonzero one, since P_jj = 0 forces P_ji = 0.
    """
    weights = np.sum(np.abs(basis) ** 2, axis=1)
    index = int(np.flatnonzero(weights > GROUND_SUPPORT_TOL)[0])
    vector = basis @ basis[index].conj()
    vector = vector / np.linalg.norm(vector)
    first = np.flatnonzero(np.abs(vector) > 1e-12)[0]
    return vector * (abs(vector[first]) / vector[first])


def ground_state(h, tol=DEGENERACY_TOL, cache=None):
    cache = cache or SpectrumCache.from_hamiltonian(h, tol)
    basis = cache.group_basis(0)
    degeneracy = basis.shape[1]
    if degeneracy > 1:
        logger.warning('Ground space of the %d-qubit Hamiltonian is %d-fold degenerate', h.n_qubits, degeneracy)
    return GroundState(cache.group_energy(0), StateVector(pick_ground_vector(basis)), degeneracy, basis)


def eigenspace_histogram(state, h, tol=DEGENERACY_TOL, cache=None):
    """(E_j, ‖P_j ψ‖²) for every eigenvalue group of ``h``, lowest first."""
    cache = cache or SpectrumCache.from_hamiltonian(h, tol)
    if state.n_qubits != cache.n_qubits:
        raise SizeMismatchError('State and Hamiltonian sizes differ')
    histogram = [
        (cache.group_energy(j), subspace_fidelity(state, cache.group_basis(j)))
        for j in range(len(cache.groups))
    ]
    total = sum(w for _, w in histogram)
    if abs(total - 1.0) > 1e-9:
        raise NumericFailure(f'Eigenspace weights sum to {total!r}')
    return histogram


def dense_unitary(schedule):
    """Noiseless unitary of a schedule: the cycle unitary raised to the repetition count."""
    check_dense_cap(schedule.n_qubits)
    n = schedule.n_qubits
    cycle = np.eye(2 ** n, dtype=complex)
    for instruction in schedule.cycle:
        if isinstance(instruction, ApplyLocal):
            cycle = instruction.layer.to_matrix() @ cycle
        else:
            cycle = np.exp(-1j * zz_phase_exponent(n, instruction.zz_angles()))[:, None] * cycle
    return np.linalg.matrix_power(cycle, schedule.repetitions)


def operator_distance(u, v):
    """Spectral-norm distance ‖u - v‖₂."""
    return float(np.linalg.norm(u - v, 2))
