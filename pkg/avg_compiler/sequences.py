"""
Control sequences and the effective (average) Hamiltonian they produce.

A sequence {(p_i, V_i)} interleaves a raw interaction H0 with fast local
layers; to first order in the gate time it generates Σ p_i V_i H0 V_i†.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from pauli_core.hamiltonian import Hamiltonian, conjugate
from pauli_core.unitaries import (
    SQRT_X, SQRT_X_DAG, SQRT_Y, LocalLayer, SingleQubitUnitary,
)
from uqsim_backend.errors import SizeMismatchError, UsageError

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ControlSequence:
    steps: tuple

    def __post_init__(self):
        steps = tuple((float(p), layer) for p, layer in self.steps)
        if not steps:
            raise UsageError('Control sequence needs at least one step')
        for p, _ in steps:
            if not 0.0 < p <= 1.0:
                raise UsageError(f'Step weight {p} outside (0, 1]')
        total = math.fsum(p for p, _ in steps)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise UsageError(f'Step weights sum to {total!r}, expected 1')
        sizes = {layer.n_qubits for _, layer in steps}
        if len(sizes) != 1:
            raise SizeMismatchError(f'Sequence layers act on different register sizes {sorted(sizes)}')
        object.__setattr__(self, 'steps', steps)

    @classmethod
    def from_weights(cls, weights, layers):
        """Drop zero-weight entries and normalise the rest."""
        kept = [(w, layer) for w, layer in zip(weights, layers) if w > 0]
        if not kept:
            raise UsageError('All sequence weights vanish')
        total = math.fsum(w for w, _ in kept)
        return cls(tuple((w / total, layer) for w, layer in kept))

    @classmethod
    def identity(cls, n_qubits):
        return cls(((1.0, LocalLayer.identity(n_qubits)),))

    @property
    def n(self):
        return len(self.steps)

    @property
    def n_qubits(self):
        return self.steps[0][1].n_qubits

    @property
    def weights(self):
        return tuple(p for p, _ in self.steps)

    @property
    def layers(self):
        return tuple(layer for _, layer in self.steps)

    def is_homogeneous(self):
        return all(layer.uniform() for layer in self.layers)

    def framed(self, frames):
        """Average every step over ``frames``, applied before the step's own layer."""
        frames = tuple(frames)
        return ControlSequence(tuple(
            (p / len(frames), frame.then(layer))
            for p, layer in self.steps
            for frame in frames
        ))


def effective_hamiltonian(seq, h0):
    if seq.n_qubits != h0.n_qubits:
        raise SizeMismatchError(f'Sequence acts on {seq.n_qubits} qubits, H0 on {h0.n_qubits}')
    total = Hamiltonian.zero(h0.n_qubits)
    for p, layer in seq.steps:
        total = total + conjugate(h0, layer) * p
    return total


# exp(+iπσx/4), the right-hand factor of the antisymmetric two-step sequence
_SQRT_X_PLUS = SQRT_X_DAG


def protocol_library(name, n_qubits=2):
    """Published sequences: identity, heisenberg3, xy2 (homogeneous) and antisym2 (2 qubits)."""
    if name == 'identity':
        return ControlSequence.identity(n_qubits)
    if name == 'heisenberg3':
        third = 1.0 / 3.0
        return ControlSequence((
            (third, LocalLayer.identity(n_qubits)),
            (third, LocalLayer.homogeneous(SQRT_X, n_qubits)),
            (1.0 - 2 * third, LocalLayer.homogeneous(SQRT_Y, n_qubits)),
        ))
    if name == 'xy2':
        return ControlSequence((
            (0.5, LocalLayer.homogeneous(SQRT_X, n_qubits)),
            (0.5, LocalLayer.homogeneous(SQRT_Y, n_qubits)),
        ))
    if name == 'antisym2':
        if n_qubits != 2:
            raise SizeMismatchError('antisym2 is a two-qubit sequence')
        identity = SingleQubitUnitary.identity()
        return ControlSequence((
            (0.5, LocalLayer.inhomogeneous((identity, _SQRT_X_PLUS))),
            (0.5, LocalLayer.inhomogeneous((SQRT_X, identity))),
        ))
    raise UsageError(f'Unknown protocol {name!r}; expected identity, heisenberg3, xy2 or antisym2')


@dataclass(frozen=True)
class ProtocolCheck:
    name: str
    effective: Hamiltonian
    scale: float
    matches: bool
    sign_consistent: bool


def check_protocol(name, target, h0, tol=1e-12):
    """Compare a library sequence's effective Hamiltonian with ``target``.

    ``scale`` is the factor s with s·H_eff = target. A negative s means the
    published sequence produces the target only with the opposite sign of the
    raw coupling; this is reported, not corrected.
    """
    effective = effective_hamiltonian(protocol_library(name, h0.n_qubits), h0)
    if effective.is_zero() or target.is_zero():
        matches = effective.is_zero() and target.is_zero()
        return ProtocolCheck(name, effective, 1.0 if matches else 0.0, matches, matches)
    pivot = effective.terms[0]
    scale = target.coefficient(pivot.ops) / pivot.coeff
    matches = scale != 0.0 and (effective * scale).isclose(target, tol)
    sign_consistent = matches and scale > 0
    if matches and not sign_consistent:
        logger.warning('Protocol %s reproduces the target only with reversed coupling sign (scale %.6g)',
                       name, scale)
    return ProtocolCheck(name, effective, scale, matches, sign_consistent)


def magnetic_field_layer(B, direction, dt, n_qubits=None):
    """Local layer exp(-i B (n·σ) dt).

    ``B`` may be a scalar (homogeneous field, ``n_qubits`` required) or a
    per-qubit sequence B_a, which gives an inhomogeneous layer.
    """
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-10:
        raise UsageError(f'Field direction must be a unit 3-vector, got {direction}')
    if np.ndim(B) == 0:
        if n_qubits is None:
            raise UsageError('Homogeneous field layer needs n_qubits')
        return LocalLayer.homogeneous(SingleQubitUnitary.rotation(n, float(B) * dt), n_qubits)
    return LocalLayer.inhomogeneous(SingleQubitUnitary.rotation(n, float(b) * dt) for b in B)


def local_evolution_layer(h, dt):
    """exp(-i h dt) for a Hamiltonian made of one-qubit terms only."""
    fields = np.zeros((h.n_qubits, 3))
    for term in h.terms:
        if term.weight != 1:
            raise UsageError(f'Term {term.label} is not a one-qubit term')
        qubit = term.support[0]
        fields[qubit, 'XYZ'.index(term.ops[qubit])] += term.coeff
    unitaries = []
    for field_vector in fields:
        strength = float(np.linalg.norm(field_vector))
        if strength == 0.0:
            unitaries.append(SingleQubitUnitary.identity())
        else:
            unitaries.append(SingleQubitUnitary.rotation(field_vector / strength, strength * dt))
    layer = LocalLayer.inhomogeneous(unitaries)
    if layer.uniform():
        return LocalLayer.homogeneous(unitaries[0], h.n_qubits)
    return layer
