"""
Composite gates built from short evolutions: the group-commutator gate that
turns two-body generators into a three-body one, and the flip echo that
removes single-qubit Z phases from a raw gate.
"""
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import linalg

from pauli_core.hamiltonian import Hamiltonian, commutator
from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import SizeMismatchError, UsageError


@dataclass(frozen=True)
class Evolution:
    """exp(-i·theta·hamiltonian)."""

    hamiltonian: Hamiltonian
    theta: float

    def unitary(self):
        return linalg.expm(-1j * self.theta * self.hamiltonian.to_matrix())


@dataclass(frozen=True)
class Flip:
    layer: LocalLayer

    def unitary(self):
        return self.layer.to_matrix()


def _product(steps, n_qubits):
    """Unitary of ``steps`` listed in time order."""
    return reduce(lambda acc, step: step.unitary() @ acc, steps, np.eye(2 ** n_qubits, dtype=complex))


@dataclass(frozen=True)
class ThreeBodyGate:
    steps: tuple
    generator: Hamiltonian
    effective_time: float

    def unitary(self):
        return _product(self.steps, self.generator.n_qubits)

    def target_unitary(self):
        return linalg.expm(-1j * self.effective_time * self.generator.to_matrix())


def three_body_gate(h1, h2, theta):
    """e^{-iH1θ} e^{-iH2θ} e^{iH1θ} e^{iH2θ} ≈ exp(-i G θ²) with G = -i[H1, H2]."""
    if h1.n_qubits != h2.n_qubits:
        raise SizeMismatchError(f'Generators act on {h1.n_qubits} and {h2.n_qubits} qubits')
    for h in (h1, h2):
        if h.max_weight() > 2:
            raise UsageError('three_body_gate composes two-body generators')
    # time order is right to left in the operator product
    steps = (
        Evolution(h2, -theta),
        Evolution(h1, -theta),
        Evolution(h2, theta),
        Evolution(h1, theta),
    )
    return ThreeBodyGate(steps, commutator(h1, h2).generator, theta * theta)


@dataclass(frozen=True)
class EchoSequence:
    steps: tuple
    ideal: Evolution

    def unitary(self):
        return _product(self.steps, self.ideal.hamiltonian.n_qubits)

    def fidelity(self):
        """|Tr(U_ideal† U)| / 2^N, insensitive to the global phase."""
        u = self.unitary()
        dim = u.shape[0]
        return float(abs(np.trace(self.ideal.unitary().conj().T @ u)) / dim)


def decoupling_echo(raw, theta):
    """U, V, U, V with V = iσx on every qubit.

    V flips the sign of each Z_a and leaves Z_a Z_b alone, so the composite is
    exp(-2iθ Σ γ_ab Z_a Z_b) times the global phase (-1)^N of V².
    """
    for term in raw.terms:
        if set(term.ops) - {'I', 'Z'} or term.weight > 2:
            raise UsageError(f'Echo needs Z and ZZ terms only, found {term.label}')
    flip = Flip(LocalLayer.homogeneous(SingleQubitUnitary.from_matrix([[0, 1j], [1j, 0]]), raw.n_qubits))
    gate = Evolution(raw, theta)
    ideal = Evolution(raw.two_body_part(), 2 * theta)
    return EchoSequence((gate, flip, gate, flip), ideal)
