"""
Pauli strings over N qubits.

Qubit 0 is the first entry of ``ops`` and the least significant bit of a
computational-basis index (little-endian), so the dense matrix of
``ops = (P0, P1, ..., P_{N-1})`` is ``P_{N-1} ⊗ ... ⊗ P1 ⊗ P0``.
"""
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from uqsim_backend.errors import SizeMismatchError, UsageError

PAULI_LABELS = ('I', 'X', 'Y', 'Z')

PAULI_MATRICES = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}

# (left, right) -> (phase, product) for single-site Pauli products
_SITE_PRODUCTS = {
    ('X', 'Y'): (1j, 'Z'),
    ('Y', 'Z'): (1j, 'X'),
    ('Z', 'X'): (1j, 'Y'),
    ('Y', 'X'): (-1j, 'Z'),
    ('Z', 'Y'): (-1j, 'X'),
    ('X', 'Z'): (-1j, 'Y'),
}


def site_product(left, right):
    """Product of two single-qubit Pauli labels as (phase, label)."""
    if left == 'I':
        return 1, right
    if right == 'I':
        return 1, left
    if left == right:
        return 1, 'I'
    return _SITE_PRODUCTS[(left, right)]


@dataclass(frozen=True)
class PauliString:
    ops: tuple
    coeff: float = 1.0

    def __post_init__(self):
        ops = tuple(self.ops)
        if not ops:
            raise UsageError('Pauli string needs at least one site')
        bad = [op for op in ops if op not in PAULI_LABELS]
        if bad:
            raise UsageError(f'Unknown Pauli label(s) {bad}; expected one of {PAULI_LABELS}')
        if not math.isfinite(self.coeff):
            raise UsageError(f'Pauli coefficient must be finite, got {self.coeff}')
        object.__setattr__(self, 'ops', ops)
        object.__setattr__(self, 'coeff', float(self.coeff))

    @classmethod
    def from_label(cls, label, coeff=1.0):
        return cls(tuple(label), coeff)

    @classmethod
    def on_sites(cls, n_qubits, sites, coeff=1.0):
        """String with the given {qubit: label} placed on an identity background."""
        ops = ['I'] * n_qubits
        for qubit, label in sites.items():
            if not 0 <= qubit < n_qubits:
                raise UsageError(f'Qubit index {qubit} outside 0..{n_qubits - 1}')
            ops[qubit] = label
        return cls(tuple(ops), coeff)

    @property
    def n_qubits(self):
        return len(self.ops)

    @property
    def label(self):
        return ''.join(self.ops)

    @property
    def support(self):
        return tuple(q for q, op in enumerate(self.ops) if op != 'I')

    @property
    def weight(self):
        return len(self.support)

    def with_coeff(self, coeff):
        return PauliString(self.ops, coeff)

    def to_matrix(self):
        factors = [PAULI_MATRICES[op] for op in reversed(self.ops)]
        return self.coeff * reduce(np.kron, factors)

    def __str__(self):
        return f'{self.coeff!r} {" ".join(self.ops)}'


def pauli_multiply(p, q):
    """Return (phase, r) with p·q = phase · r, phase in {±1, ±i}.

    The coefficient of ``r`` is ``p.coeff * q.coeff``.
    """
    if p.n_qubits != q.n_qubits:
        raise SizeMismatchError(f'Cannot multiply {p.n_qubits}-qubit and {q.n_qubits}-qubit strings')
    phase = 1
    ops = []
    for left, right in zip(p.ops, q.ops):
        site_phase, op = site_product(left, right)
        phase *= site_phase
        ops.append(op)
    return complex(phase), PauliString(tuple(ops), p.coeff * q.coeff)


def ops_commute(p_ops, q_ops):
    anticommuting = sum(
        1 for left, right in zip(p_ops, q_ops)
        if left != 'I' and right != 'I' and left != right
    )
    return anticommuting % 2 == 0
