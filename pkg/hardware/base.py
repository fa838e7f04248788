"""
What the compiler needs from a platform: how two-body terms split into raw
gate families and which local layers it can apply.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pauli_core.coeff import CoeffMatrix

MATCH_TOL = 1e-12


@dataclass(frozen=True)
class GateFamily:
    """One raw gate exp(-iθ Σ w Z_a Z_b) and the coefficient matrix it must realise.

    ``coupling`` is the raw strength seen by every target pair per unit time,
    ``gamma`` the strength per unit gate angle θ. ``pair`` names the bond the
    matrix refers to when local control may differ between qubits.
    """

    gate_id: str
    targets: tuple
    weights: tuple
    gamma: float
    coupling: float
    matrix: CoeffMatrix
    pair: Optional[tuple] = None
    isolate: bool = False

    @property
    def sort_key(self):
        return (self.gate_id, self.pair or self.targets[0], self.targets)


def same_matrix(m1, m2, tol=MATCH_TOL):
    return bool(np.max(np.abs(m1.matrix - m2.matrix)) <= tol)


def site_fields(local):
    """Per-qubit field vectors (x, y, z) of a Hamiltonian made of one-qubit terms."""
    fields = np.zeros((local.n_qubits, 3))
    for term in local.terms:
        qubit = term.support[0]
        fields[qubit, 'XYZ'.index(term.ops[qubit])] += term.coeff
    return fields
