"""
UQS1: atoms in a state-dependent optical lattice.

Displacing the two internal-state sublattices by j sites and back couples
every atom to its j-th neighbour at once, K_j = Σ_a Z_a Z_{a+j}. Local control
is a single beam acting equally on every atom unless the model is marked
addressable.
"""
import logging
from dataclasses import dataclass

import numpy as np

from avg_compiler.schedule import RawGate
from pauli_core.coeff import CoeffMatrix, pair_coeff_matrix
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.paulis import PauliString
from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import HardwareConstraintError, UsageError
from .base import GateFamily, same_matrix, site_fields

logger = logging.getLogger(__name__)

BOUNDARIES = ('open', 'periodic')
ADDRESSABILITY = 'requires single qubit addressability'


@dataclass(frozen=True)
class LatticeModel:
    shape: tuple
    boundary: str = 'open'
    available_j: frozenset = frozenset({1})
    gamma: float = 1.0
    addressable: bool = False
    diagonal: bool = False

    name = 'uqs1'

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) not in (1, 2) or min(shape) < 1:
            raise UsageError(f'Lattice shape must be (n,) or (rows, cols), got {self.shape}')
        object.__setattr__(self, 'shape', shape)
        if self.boundary not in BOUNDARIES:
            raise UsageError(f'Unknown boundary {self.boundary!r}; expected one of {BOUNDARIES}')
        available = frozenset(int(j) for j in self.available_j)
        longest = max(shape)
        bad = sorted(j for j in available if not 1 <= j < longest)
        if bad:
            raise UsageError(f'Displacements {bad} outside 1..{longest - 1}')
        if not available:
            raise UsageError('Lattice needs at least one available displacement')
        object.__setattr__(self, 'available_j', available)
        if self.gamma == 0:
            raise UsageError('Raw coupling gamma must be nonzero')
        if self.diagonal and len(shape) != 2:
            raise UsageError('Diagonal displacement needs a 2D lattice')

    @classmethod
    def chain(cls, n_sites, **kwargs):
        return cls((n_sites,), **kwargs)

    @classmethod
    def grid(cls, rows, cols, **kwargs):
        return cls((rows, cols), **kwargs)

    @property
    def n_sites(self):
        return int(np.prod(self.shape))

    n_qubits = n_sites

    @property
    def dims(self):
        return len(self.shape)

    @property
    def allows_inhomogeneous(self):
        return self.addressable

    def site(self, row, col):
        return row * self.shape[1] + col

    def _axis_pairs(self, length, j):
        pairs = [(a, a + j) for a in range(length - j)]
        if self.boundary == 'periodic':
            pairs += [(a, (a + j) % length) for a in range(length - j, length)]
        seen, unique = set(), []
        for a, b in pairs:
            key = frozenset((a, b))
            if key not in seen:
                seen.add(key)
                unique.append((a, b))
        return unique

    def translation_classes(self):
        """gate_id -> oriented pairs (a, a+j) moved together by one displacement."""
        classes = {}
        if self.dims == 1:
            for j in sorted(self.available_j):
                if j < self.shape[0]:
                    classes[f'K{j}'] = tuple(self._axis_pairs(self.shape[0], j))
            return classes
        rows, cols = self.shape
        for j in sorted(self.available_j):
            if j < cols:
                classes[f'K{j}h'] = tuple(
                    (self.site(r, a), self.site(r, b))
                    for r in range(rows) for a, b in self._axis_pairs(cols, j)
                )
            if j < rows:
                classes[f'K{j}v'] = tuple(
                    (self.site(a, c), self.site(b, c))
                    for c in range(cols) for a, b in self._axis_pairs(rows, j)
                )
        if self.diagonal:
            classes['K1d'] = tuple(
                (self.site(r, c), self.site(r + 1, c + 1))
                for r in range(rows - 1) for c in range(cols - 1)
            )
        return {gate_id: pairs for gate_id, pairs in classes.items() if pairs}

    def families(self, two_body):
        """Group two-body terms into translation classes of the available displacements."""
        classes = self.translation_classes()
        owner = {}
        for gate_id, pairs in classes.items():
            for pair in pairs:
                owner.setdefault(frozenset(pair), gate_id)
        touched = set()
        for term in two_body.terms:
            bond = frozenset(term.support)
            if bond not in owner:
                raise HardwareConstraintError(
                    f'No available displacement couples qubits {sorted(bond)} on this lattice'
                )
            touched.add(owner[bond])
        families = []
        for gate_id in sorted(touched):
            pairs = classes[gate_id]
            matrices = [pair_coeff_matrix(two_body, a, b) for a, b in pairs]
            owned = [m for (a, b), m in zip(pairs, matrices) if owner[frozenset((a, b))] == gate_id]
            first = owned[0]
            if all(same_matrix(first, m) for m in matrices):
                families.append(GateFamily(gate_id, pairs, (1.0,) * len(pairs), self.gamma,
                                           self.gamma, CoeffMatrix.from_array(first.matrix)))
                continue
            if not self._can_isolate(gate_id):
                raise HardwareConstraintError(
                    f'Coefficients of {gate_id} differ between bonds; a non-translation-invariant '
                    f'target {ADDRESSABILITY}'
                )
            logger.info('Isolating %d bonds of %s with Pauli frames', len(pairs), gate_id)
            for pair, m in zip(pairs, matrices):
                if not m.is_zero():
                    families.append(GateFamily(gate_id, pairs, (1.0,) * len(pairs), self.gamma,
                                               self.gamma, CoeffMatrix.from_array(m.matrix), pair, True))
        return families

    def _can_isolate(self, gate_id):
        return self.addressable and self.dims == 1 and self.boundary == 'open' and gate_id == 'K1'

    def check_local(self, local):
        if self.addressable or local.is_zero():
            return
        fields = site_fields(local)
        if np.max(np.abs(fields - fields[0])) > 1e-12:
            raise HardwareConstraintError(f'Site-dependent local fields {ADDRESSABILITY}')

    def check_layer(self, layer):
        if not self.addressable and not layer.uniform():
            raise HardwareConstraintError(f'Inhomogeneous local layer {ADDRESSABILITY}')

    def isolation_frames(self, pair):
        """Two X-flip frames whose average of K_1 keeps only the bond ``pair``."""
        a = min(pair)
        n = self.n_sites
        signs = [1] * n
        for c in range(n - 1):
            signs[c + 1] = signs[c] if c == a else -signs[c]
        flips = {q: SingleQubitUnitary.pauli('X') for q, s in enumerate(signs) if s < 0}
        return LocalLayer.identity(n), LocalLayer.on_qubits(n, flips)


def lattice_generator(model, pairs):
    return Hamiltonian.from_terms(model.n_sites, (
        PauliString.on_sites(model.n_sites, {a: 'Z', b: 'Z'}) for a, b in pairs
    ))


@dataclass(frozen=True)
class LatticeGate:
    generator: Hamiltonian
    gate: RawGate


def uqs1_gate(model, j, theta_j, axis=None):
    """K_j and the raw gate U_j = exp(-iθ_j K_j).

    On 2D lattices the displacement runs along both axes unless ``axis`` is
    'h' or 'v'.
    """
    if j not in model.available_j:
        raise HardwareConstraintError(f'Displacement j={j} not available (have {sorted(model.available_j)})')
    classes = model.translation_classes()
    if model.dims == 1:
        gate_id, pairs = f'K{j}', classes[f'K{j}']
    elif axis in ('h', 'v'):
        gate_id = f'K{j}{axis}'
        if gate_id not in classes:
            raise HardwareConstraintError(f'Displacement j={j} does not fit along axis {axis}')
        pairs = classes[gate_id]
    else:
        gate_id = f'K{j}'
        pairs = classes.get(f'K{j}h', ()) + classes.get(f'K{j}v', ())
    return LatticeGate(lattice_generator(model, pairs), RawGate(gate_id, theta_j, pairs))


def geometry_remap(pattern, base):
    """Neighbour pairs of a triangular or hexagonal pattern drawn on a rectangular lattice."""
    if base.dims != 2:
        raise UsageError('Geometry remapping needs a 2D lattice')
    rows, cols = base.shape
    horizontal = [(base.site(r, c), base.site(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    vertical = [(base.site(r, c), base.site(r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    if pattern == 'rectangular':
        return horizontal + vertical
    if pattern == 'triangular':
        diagonal = [(base.site(r, c), base.site(r + 1, c + 1)) for r in range(rows - 1) for c in range(cols - 1)]
        return horizontal + vertical + diagonal
    if pattern == 'hexagonal':
        # brick wall: every other vertical rung
        rungs = [(base.site(r, c), base.site(r + 1, c))
                 for r in range(rows - 1) for c in range(cols) if (r + c) % 2 == 0]
        return horizontal + rungs
    raise UsageError(f'Unknown pattern {pattern!r}; expected rectangular, triangular or hexagonal')
