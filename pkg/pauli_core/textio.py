"""
Plain-text Hamiltonian format.

One term per line, ``coeff op_1 op_2 ... op_N`` with ops in {I, X, Y, Z};
op_1 acts on qubit 0. Lines starting with ``#`` are comments, blank lines are
ignored. The header line written by ``format_hamiltonian`` fixes the qubit
count, so an empty Hamiltonian round-trips.
"""
import math

from uqsim_backend.errors import ParseError
from .hamiltonian import Hamiltonian
from .paulis import PAULI_LABELS, PauliString

FORMAT_TAG = 'uqs-hamiltonian/1'


def parse_hamiltonian(text, n_qubits=None):
    terms = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(f'# {FORMAT_TAG}'):
            n_qubits = _header_size(line, line_no, n_qubits)
            continue
        if not line or line.startswith('#'):
            continue
        column = raw.index(line[0]) + 1
        fields = line.split()
        try:
            coeff = float(fields[0])
        except ValueError:
            raise ParseError(f'coefficient {fields[0]!r} is not a number', line_no, column) from None
        if not math.isfinite(coeff):
            raise ParseError('coefficient must be finite', line_no, column)
        ops = fields[1:]
        if len(ops) == 1 and len(ops[0]) > 1:
            # compact form "0.5 XXI"
            ops = list(ops[0])
        offset = column + len(fields[0]) + 1
        for op in ops:
            if op not in PAULI_LABELS:
                raise ParseError(f'unknown Pauli label {op!r}', line_no, raw.find(op, offset - 1) + 1)
        if n_qubits is None:
            n_qubits = len(ops)
        if len(ops) != n_qubits:
            raise ParseError(f'expected {n_qubits} Pauli labels, found {len(ops)}', line_no, offset)
        if n_qubits == 0:
            raise ParseError('term has no Pauli labels', line_no, offset)
        terms.append(PauliString(tuple(ops), coeff))
    if n_qubits is None:
        raise ParseError('empty Hamiltonian needs an explicit qubit count')
    return Hamiltonian.from_terms(n_qubits, terms)


def _header_size(line, line_no, n_qubits):
    """Qubit count from the ``# uqs-hamiltonian/1 n_qubits=N`` header line."""
    values = dict(token.partition('=')[::2] for token in line.split()[2:] if '=' in token)
    if 'n_qubits' not in values:
        return n_qubits
    column = line.find('n_qubits') + 1
    try:
        declared = int(values['n_qubits'])
    except ValueError:
        raise ParseError(f'n_qubits {values["n_qubits"]!r} is not an integer', line_no, column) from None
    if declared < 1:
        raise ParseError(f'header declares {declared} qubits', line_no, column)
    if n_qubits is not None and declared != n_qubits:
        raise ParseError(f'header declares {declared} qubits, expected {n_qubits}', line_no, column)
    return declared


def format_hamiltonian(h):
    lines = [f'# {FORMAT_TAG} n_qubits={h.n_qubits} endianness=little']
    lines.extend(f'{term.coeff!r} {" ".join(term.ops)}' for term in h.terms)
    return '\n'.join(lines) + '\n'
