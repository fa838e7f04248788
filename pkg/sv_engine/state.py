"""
Dense statevectors and the kernels that act on them.

Amplitude index k has qubit q in bit q (little-endian), so in the tensor view
``amplitudes.reshape([2] * n)`` qubit q is axis n - 1 - q.
"""
import logging
import math
from functools import lru_cache

import numpy as np
from django.conf import settings

from pauli_core.paulis import PAULI_LABELS, PauliString
from uqsim_backend.errors import NumericFailure, ParseError, SizeMismatchError, UsageError
from .noise import as_stream

logger = logging.getLogger(__name__)

NORM_TOL = 1e-9
DUMP_CUTOFF = 1e-15
DUMP_TAG = 'uqs-state/1'


@lru_cache(maxsize=8)
def basis_indices(n_qubits):
    indices = np.arange(2 ** n_qubits, dtype=np.int64)
    indices.flags.writeable = False
    return indices


class StateVector:
    def __init__(self, amplitudes, check_norm=True):
        amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
        size = amplitudes.size
        n_qubits = size.bit_length() - 1
        if size < 2 or 2 ** n_qubits != size:
            raise SizeMismatchError(f'Amplitude count {size} is not a power of two')
        if n_qubits > settings.UQS_STATEVECTOR_CAP:
            raise UsageError(f'{n_qubits} qubits exceeds the statevector cap {settings.UQS_STATEVECTOR_CAP}')
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes
        if check_norm:
            self.check_norm()

    @classmethod
    def zero(cls, n_qubits):
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits, index):
        if not 0 <= index < 2 ** n_qubits:
            raise UsageError(f'Basis index {index} outside 0..{2 ** n_qubits - 1}')
        amplitudes = np.zeros(2 ** n_qubits, dtype=complex)
        amplitudes[index] = 1.0
        return cls(amplitudes)

    @classmethod
    def from_bits(cls, bits):
        """Product state with qubit q set to ``bits[q]``."""
        return cls.basis(len(bits), sum(int(b) << q for q, b in enumerate(bits)))

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self, tol=NORM_TOL):
        deviation = abs(self.norm() - 1.0)
        if deviation > tol:
            raise NumericFailure(f'State norm drifted by {deviation:.3e}')

    def copy(self):
        return StateVector(self.amplitudes.copy(), check_norm=False)

    def __eq__(self, other):
        return isinstance(other, StateVector) and np.array_equal(self.amplitudes, other.amplitudes)

    __hash__ = None

    def __repr__(self):
        return f'StateVector(n_qubits={self.n_qubits}, norm={self.norm():.12f})'


def _check_size(state, n_qubits):
    if state.n_qubits != n_qubits:
        raise SizeMismatchError(f'Operation on {n_qubits} qubits applied to a {state.n_qubits}-qubit state')


def apply_single_qubit(amplitudes, matrix, qubit, n_qubits):
    """Apply a 2×2 matrix to ``qubit`` of a flat amplitude array, returning a new array."""
    view = amplitudes.reshape(2 ** (n_qubits - 1 - qubit), 2, 2 ** qubit)
    return np.einsum('ij,ajb->aib', matrix, view).reshape(-1)


def apply_local_layer(state, layer, err=None):
    """Apply every qubit's unitary; ``err`` (an ErrorModel or its stream) stretches each rotation angle."""
    _check_size(state, layer.n_qubits)
    stream = as_stream(err)
    deltas = stream.draw('local', layer.n_qubits) if stream else None
    amplitudes = state.amplitudes
    for qubit, unitary in enumerate(layer.unitaries):
        if deltas is not None:
            unitary = unitary.scaled(1.0 + deltas[qubit])
        if unitary.entries == (1, 0, 0, 1):
            continue
        amplitudes = apply_single_qubit(amplitudes, unitary.matrix, qubit, state.n_qubits)
    return StateVector(amplitudes, check_norm=False)


def zz_phase_exponent(n_qubits, gates):
    """Σ θ s_a(k) s_b(k) for every basis index k, s_q(k) = ±1 from bit q."""
    indices = basis_indices(n_qubits)
    exponent = np.zeros(2 ** n_qubits)
    for a, b, theta in gates:
        if a == b:
            raise UsageError(f'ZZ gate needs two distinct qubits, got ({a}, {b})')
        if not (0 <= a < n_qubits and 0 <= b < n_qubits):
            raise SizeMismatchError(f'ZZ gate ({a}, {b}) outside a {n_qubits}-qubit register')
        parity = ((indices >> a) ^ (indices >> b)) & 1
        exponent += theta * (1 - 2 * parity)
    return exponent


def apply_zz_gates(state, gates, err=None):
    """Multiply amplitude k by exp(-iθ s_a(k) s_b(k)) for every (a, b, θ)."""
    gates = list(gates)
    stream = as_stream(err)
    deltas = stream.draw('int', len(gates)) if stream and gates else None
    if deltas is not None:
        gates = [(a, b, theta * (1.0 + d)) for (a, b, theta), d in zip(gates, deltas)]
    exponent = zz_phase_exponent(state.n_qubits, gates)
    return StateVector(state.amplitudes * np.exp(-1j * exponent), check_norm=False)


def fidelity(psi, phi):
    if psi.n_qubits != phi.n_qubits:
        raise SizeMismatchError(f'Fidelity between {psi.n_qubits}- and {phi.n_qubits}-qubit states')
    return min(1.0, float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def subspace_fidelity(state, basis):
    """‖P ψ‖² for the projector onto the orthonormal columns of ``basis``."""
    basis = np.asarray(basis)
    if basis.shape[0] != state.amplitudes.size:
        raise SizeMismatchError('Subspace basis does not match the state dimension')
    return min(1.0, float(np.sum(np.abs(basis.conj().T @ state.amplitudes) ** 2)))


def _pauli_masks(ops):
    x_mask = z_mask = n_y = 0
    for qubit, op in enumerate(ops):
        if op in ('X', 'Y'):
            x_mask |= 1 << qubit
        if op in ('Y', 'Z'):
            z_mask |= 1 << qubit
        n_y += op == 'Y'
    return x_mask, z_mask, n_y


def apply_pauli(amplitudes, ops):
    """P|ψ⟩ using P|k⟩ = i^{#Y} (-1)^{|k ∧ z|} |k ⊕ x⟩."""
    n_qubits = len(ops)
    indices = basis_indices(n_qubits)
    x_mask, z_mask, n_y = _pauli_masks(ops)
    parity = np.zeros_like(indices)
    for qubit in range(n_qubits):
        if z_mask >> qubit & 1:
            parity ^= (indices >> qubit) & 1
    signs = 1 - 2 * parity
    out = np.empty_like(amplitudes)
    out[indices ^ x_mask] = (1j ** n_y) * signs * amplitudes
    return out


def pauli_expectation(state, string):
    _check_size(state, string.n_qubits)
    value = np.vdot(state.amplitudes, apply_pauli(state.amplitudes, string.ops))
    if abs(value.imag) > 1e-10:
        raise NumericFailure(f'Expectation of {string.label} has imaginary part {value.imag:.3e}')
    return string.coeff * float(value.real)


def energy(state, hamiltonian):
    return math.fsum(pauli_expectation(state, term) for term in hamiltonian.terms)


def parse_observable(request, n_qubits):
    """'Z0', 'X0 X1' or 'Z0Z1' style requests become Pauli strings."""
    if isinstance(request, PauliString):
        return request
    text = request.replace(' ', '')
    sites, k = {}, 0
    while k < len(text):
        op = text[k].upper()
        j = k + 1
        while j < len(text) and text[j].isdigit():
            j += 1
        if op not in PAULI_LABELS or j == k + 1:
            raise UsageError(f'Malformed observable {request!r}; use e.g. "Z0" or "X0 X1"')
        qubit = int(text[k + 1:j])
        if not 0 <= qubit < n_qubits:
            raise UsageError(f'Observable {request!r} names qubit {qubit} outside 0..{n_qubits - 1}')
        if qubit in sites:
            raise UsageError(f'Observable {request!r} names qubit {qubit} twice')
        sites[qubit] = op
        k = j
    if not sites:
        raise UsageError('Empty observable request')
    return PauliString.on_sites(n_qubits, sites)


def observables(state, spec):
    """Expectation values for one- and two-point Pauli requests, keyed by request."""
    results = []
    for request in spec:
        string = parse_observable(request, state.n_qubits)
        name = request if isinstance(request, str) else string.label
        results.append((name, pauli_expectation(state, string)))
    return results


def dump_state(state):
    lines = [
        f'# {DUMP_TAG}',
        f'# n_qubits={state.n_qubits}',
        '# endianness=little',
        f'# norm={state.norm()!r}',
    ]
    for index in np.flatnonzero(np.abs(state.amplitudes) > DUMP_CUTOFF):
        amplitude = state.amplitudes[index]
        lines.append(f'{index} {amplitude.real!r} {amplitude.imag!r}')
    return '\n'.join(lines) + '\n'


def parse_state_dump(text):
    n_qubits = None
    entries = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            key, sep, value = line[1:].strip().partition('=')
            if sep and key == 'n_qubits':
                n_qubits = int(value)
            elif sep and key == 'endianness' and value != 'little':
                raise ParseError(f'unsupported endianness {value!r}', line_no)
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError('expected "index real imag"', line_no, 1)
        try:
            entries.append((int(fields[0]), complex(float(fields[1]), float(fields[2]))))
        except ValueError:
            raise ParseError('malformed amplitude line', line_no, 1) from None
    if n_qubits is None:
        raise ParseError('state dump lacks an n_qubits header')
    amplitudes = np.zeros(2 ** n_qubits, dtype=complex)
    for index, value in entries:
        if not 0 <= index < amplitudes.size:
            raise ParseError(f'amplitude index {index} outside the register')
        amplitudes[index] = value
    return StateVector(amplitudes)
