"""
3×3 coefficient-matrix view of two-qubit interactions, H = Σ M_ij σ_i ⊗ σ_j.

Row index i labels the operator on the first qubit, column j the second one,
both ordered x, y, z.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from uqsim_backend.errors import SizeMismatchError, UsageError
from .hamiltonian import Hamiltonian
from .paulis import PauliString

AXES = ('X', 'Y', 'Z')


@dataclass(frozen=True)
class CoeffMatrix:
    entries: tuple
    local_terms: tuple = field(default=(), compare=False)

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.entries)
        if len(rows) != 3 or any(len(row) != 3 for row in rows):
            raise UsageError('Coefficient matrix must be 3x3')
        if not all(math.isfinite(v) for row in rows for v in row):
            raise UsageError('Coefficient matrix entries must be finite')
        object.__setattr__(self, 'entries', rows)

    @classmethod
    def from_array(cls, matrix, local_terms=()):
        return cls(tuple(map(tuple, np.asarray(matrix, dtype=float))), tuple(local_terms))

    @classmethod
    def diagonal(cls, xx, yy, zz):
        return cls.from_array(np.diag([xx, yy, zz]))

    @property
    def matrix(self):
        return np.array(self.entries, dtype=float)

    def is_symmetric(self, tol=1e-10):
        m = self.matrix
        return bool(np.max(np.abs(m - m.T)) <= tol)

    def is_diagonal(self, tol=1e-14):
        m = self.matrix
        return bool(np.max(np.abs(m - np.diag(np.diag(m)))) <= tol)

    def is_zero(self, tol=1e-14):
        return bool(np.max(np.abs(self.matrix)) <= tol)

    def __mul__(self, scalar):
        return CoeffMatrix.from_array(self.matrix * scalar, self.local_terms)

    __rmul__ = __mul__


def coeff_matrix(h):
    """Split a two-qubit Hamiltonian into its 3×3 interaction matrix and local terms."""
    if h.n_qubits != 2:
        raise SizeMismatchError(f'coeff_matrix needs a 2-qubit Hamiltonian, got {h.n_qubits} qubits')
    return pair_coeff_matrix(h, 0, 1)


def pair_coeff_matrix(h, a, b):
    """Interaction matrix of the terms acting exactly on qubits (a, b) of ``h``.

    Terms with identity on one of the two sites are returned in ``local_terms``;
    terms touching any other qubit are ignored.
    """
    if a == b:
        raise UsageError('Pair needs two distinct qubits')
    m = np.zeros((3, 3))
    local = []
    for term in h.terms:
        support = set(term.support)
        if not support <= {a, b}:
            continue
        if support == {a, b}:
            m[AXES.index(term.ops[a]), AXES.index(term.ops[b])] += term.coeff
        else:
            local.append(term)
    return CoeffMatrix.from_array(m, local)


def from_coeff_matrix(matrix, local_terms=(), n_qubits=2, pair=(0, 1)):
    """Inverse of :func:`pair_coeff_matrix`."""
    if not isinstance(matrix, CoeffMatrix):
        matrix = CoeffMatrix.from_array(matrix)
    a, b = pair
    terms = list(local_terms)
    for i, left in enumerate(AXES):
        for j, right in enumerate(AXES):
            value = matrix.entries[i][j]
            if value != 0.0:
                terms.append(PauliString.on_sites(n_qubits, {a: left, b: right}, value))
    return Hamiltonian.from_terms(n_qubits, terms)
