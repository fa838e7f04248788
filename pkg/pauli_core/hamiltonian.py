"""
Hamiltonians as canonical sums of real-weighted Pauli strings.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from uqsim_backend.errors import NonHermitianError, SizeMismatchError, UsageError
from .paulis import PAULI_LABELS, PauliString, pauli_multiply

PRUNE_TOL = 1e-14
HERMITICITY_TOL = 1e-12

_AXIS_LABELS = ('X', 'Y', 'Z')


def _canonical(n_qubits, coefficients):
    terms = [
        PauliString(ops, coeff)
        for ops, coeff in sorted(coefficients.items())
        if abs(coeff) >= PRUNE_TOL
    ]
    return Hamiltonian(n_qubits, tuple(terms))


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian operator Σ c_k P_k with canonical (sorted, merged, pruned) terms.

    Build instances through :meth:`from_terms` / :meth:`from_dict`; the plain
    constructor expects terms that are already canonical.
    """

    n_qubits: int
    terms: tuple = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise UsageError(f'n_qubits must be positive, got {self.n_qubits}')
        for term in self.terms:
            if term.n_qubits != self.n_qubits:
                raise SizeMismatchError(
                    f'Term {term.label} has {term.n_qubits} sites, Hamiltonian has {self.n_qubits}'
                )

    @classmethod
    def zero(cls, n_qubits):
        return cls(n_qubits, ())

    @classmethod
    def from_terms(cls, n_qubits, terms):
        """Merge an iterable of PauliString (or (coeff, label) pairs) into canonical form."""
        coefficients = {}
        for term in terms:
            if not isinstance(term, PauliString):
                coeff, label = term
                term = PauliString(tuple(label), coeff)
            if term.n_qubits != n_qubits:
                raise SizeMismatchError(f'Term {term.label} does not act on {n_qubits} qubits')
            coefficients[term.ops] = coefficients.get(term.ops, 0.0) + term.coeff
        return _canonical(n_qubits, coefficients)

    @classmethod
    def from_dict(cls, n_qubits, coefficients):
        return cls.from_terms(n_qubits, (PauliString(tuple(ops), c) for ops, c in coefficients.items()))

    def as_dict(self):
        return {term.ops: term.coeff for term in self.terms}

    def coefficient(self, ops):
        return self.as_dict().get(tuple(ops), 0.0)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def _check_size(self, other):
        if other.n_qubits != self.n_qubits:
            raise SizeMismatchError(f'Hamiltonians act on {self.n_qubits} and {other.n_qubits} qubits')

    def __add__(self, other):
        self._check_size(other)
        return Hamiltonian.from_terms(self.n_qubits, itertools.chain(self.terms, other.terms))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        scalar = float(scalar)
        return Hamiltonian.from_terms(self.n_qubits, (t.with_coeff(t.coeff * scalar) for t in self.terms))

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def isclose(self, other, tol=1e-12):
        self._check_size(other)
        difference = self - other
        return all(abs(t.coeff) <= tol for t in difference.terms)

    def coefficient_norm(self):
        """Frobenius norm of the Pauli coefficient vector."""
        return math.sqrt(sum(t.coeff ** 2 for t in self.terms))

    def one_norm(self):
        return sum(abs(t.coeff) for t in self.terms)

    def max_weight(self):
        return max((t.weight for t in self.terms), default=0)

    def filter(self, predicate):
        return Hamiltonian(self.n_qubits, tuple(t for t in self.terms if predicate(t)))

    def local_part(self):
        return self.filter(lambda t: t.weight == 1)

    def two_body_part(self):
        return self.filter(lambda t: t.weight == 2)

    def to_matrix(self):
        dim = 2 ** self.n_qubits
        matrix = np.zeros((dim, dim), dtype=complex)
        for term in self.terms:
            matrix += term.to_matrix()
        return matrix

    def __str__(self):
        return '\n'.join(str(t) for t in self.terms) or f'0 ({self.n_qubits} qubits)'


@dataclass(frozen=True)
class CommutatorResult:
    """[h1, h2] expanded in the Pauli basis; every coefficient is purely imaginary."""

    n_qubits: int
    parts: tuple

    @property
    def generator(self):
        """The Hermitian operator -i[h1, h2]."""
        return Hamiltonian.from_terms(
            self.n_qubits,
            (string.with_coeff((-1j * coeff).real) for coeff, string in self.parts),
        )

    def to_matrix(self):
        dim = 2 ** self.n_qubits
        matrix = np.zeros((dim, dim), dtype=complex)
        for coeff, string in self.parts:
            matrix += coeff * string.to_matrix()
        return matrix


def commutator(h1, h2):
    if h1.n_qubits != h2.n_qubits:
        raise SizeMismatchError(f'Commutator of {h1.n_qubits}- and {h2.n_qubits}-qubit Hamiltonians')
    accumulated = {}
    for p in h1.terms:
        for q in h2.terms:
            phase, r = pauli_multiply(p, q)
            # PQ - QP = (φ - φ*) R, nonzero only for anticommuting strings
            if phase.imag == 0:
                continue
            accumulated[r.ops] = accumulated.get(r.ops, 0.0) + 2.0 * phase.imag * r.coeff
    parts = tuple(
        (1j * value, PauliString(ops, 1.0))
        for ops, value in sorted(accumulated.items())
        if abs(value) >= PRUNE_TOL
    )
    return CommutatorResult(h1.n_qubits, parts)


def conjugate(h, layer):
    """Return V h V† for the product unitary V of ``layer``."""
    if layer.n_qubits != h.n_qubits:
        raise SizeMismatchError(f'Layer acts on {layer.n_qubits} qubits, Hamiltonian on {h.n_qubits}')
    rotations = [u.conjugation_matrix() for u in layer.unitaries]
    coefficients = {}
    for term in h.terms:
        # per site: list of (label, weight) images of the site operator
        images = []
        for qubit, op in enumerate(term.ops):
            if op == 'I':
                images.append((('I', 1.0),))
                continue
            column = rotations[qubit][:, _AXIS_LABELS.index(op)]
            images.append(tuple(
                (_AXIS_LABELS[i], weight) for i, weight in enumerate(column) if abs(weight) > 1e-15
            ))
        for choice in itertools.product(*images):
            ops = tuple(label for label, _ in choice)
            weight = term.coeff
            for _, w in choice:
                weight *= w
            coefficients[ops] = coefficients.get(ops, 0.0) + weight
    return _canonical(h.n_qubits, coefficients)


# σ+ = |1⟩⟨0| = (X - iY)/2 and σ- = |0⟩⟨1| = (X + iY)/2 with Z|0⟩ = +|0⟩
_LADDER = {
    '+': (('X', 0.5), ('Y', -0.5j)),
    '-': (('X', 0.5), ('Y', 0.5j)),
}


class HamiltonianBuilder:
    """Accumulates operator products that may contain σ±, then checks Hermiticity."""

    def __init__(self, n_qubits):
        self.n_qubits = n_qubits
        self._coefficients = {}

    def add(self, coeff, sites):
        """Add ``coeff · Π_q op_q`` for ``sites = {qubit: op}``, op in I, X, Y, Z, +, -."""
        factors = []
        for qubit in range(self.n_qubits):
            op = sites.get(qubit, 'I')
            if op in _LADDER:
                factors.append(_LADDER[op])
            elif op in PAULI_LABELS:
                factors.append(((op, 1.0),))
            else:
                raise UsageError(f'Unknown site operator {op!r}')
        extra = set(sites) - set(range(self.n_qubits))
        if extra:
            raise UsageError(f'Qubit indices {sorted(extra)} outside 0..{self.n_qubits - 1}')
        for choice in itertools.product(*factors):
            ops = tuple(label for label, _ in choice)
            weight = complex(coeff)
            for _, w in choice:
                weight *= w
            self._coefficients[ops] = self._coefficients.get(ops, 0.0) + weight
        return self

    def add_hamiltonian(self, h):
        for term in h.terms:
            self._coefficients[term.ops] = self._coefficients.get(term.ops, 0.0) + term.coeff
        return self

    def build(self):
        for ops, value in self._coefficients.items():
            if abs(complex(value).imag) > HERMITICITY_TOL:
                raise NonHermitianError(
                    f'Term {"".join(ops)} has imaginary coefficient {complex(value).imag:.3e}'
                )
        return _canonical(self.n_qubits, {ops: complex(v).real for ops, v in self._coefficients.items()})
