"""
Feasibility and time cost of simulating a two-qubit coefficient matrix M
with a raw γ·ZZ interaction, plus constructive sequences for the cases the
compiler synthesises.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from pauli_core.coeff import AXES
from pauli_core.unitaries import (
    SQRT_X, SQRT_X_DAG, SQRT_Y, SQRT_Y_DAG, LocalLayer, SingleQubitUnitary,
)
from uqsim_backend.errors import InfeasibleError, UsageError
from .sequences import ControlSequence

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
VANISHING_RTOL = 1e-10


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    time_cost: Optional[float]
    eigenvalues: tuple
    reason: str = ''


@dataclass(frozen=True)
class SynthesisResult:
    """A sequence plus the time cost c it achieves and the optimal bound for M."""

    sequence: ControlSequence
    time_cost: float
    optimal_time_cost: float
    weights: tuple = ()


def _check_gamma(gamma):
    if gamma == 0 or not np.isfinite(gamma):
        raise UsageError(f'Raw coupling gamma must be finite and nonzero, got {gamma}')


def homogeneous_feasibility(M, gamma):
    _check_gamma(gamma)
    if not M.is_symmetric(SYMMETRY_TOL):
        raise InfeasibleError(
            'Homogeneous control only produces exchange-symmetric interactions; '
            'the coefficient matrix is not symmetric'
        )
    m = M.matrix
    mu = linalg.eigvalsh(0.5 * (m + m.T))
    scale = float(np.max(np.abs(mu))) if mu.size else 0.0
    vanishing = np.abs(mu) <= VANISHING_RTOL * scale
    wrong_sign = [float(v) for v, small in zip(mu, vanishing) if not small and np.sign(v) != np.sign(gamma)]
    eigenvalues = tuple(float(v) for v in mu)
    if wrong_sign:
        reason = (
            f'eigenvalues {wrong_sign} do not share the sign of gamma={gamma}; homogeneous '
            'control needs every non-vanishing eigenvalue to have the sign of the raw coupling'
        )
        return FeasibilityResult(False, None, eigenvalues, reason)
    time_cost = float(np.sum(mu[~vanishing])) / gamma + 0.0
    return FeasibilityResult(True, time_cost, eigenvalues)


def inhomogeneous_cost(M, gamma):
    _check_gamma(gamma)
    singular_values = linalg.svdvals(M.matrix)
    return float(np.sum(singular_values)) / abs(gamma)


# homogeneous Clifford conjugations taking ZZ to XX, YY and ZZ
_DIAGONAL_FRAMES = (
    ('ZZ', SingleQubitUnitary.identity(), 2),
    ('YY', SQRT_X, 1),
    ('XX', SQRT_Y, 0),
)


def synthesize_diagonal(target, gamma, n_qubits=2):
    """Homogeneous sequence realising a diagonal M at the optimal cost (Σμ)/γ."""
    if not target.is_diagonal():
        raise UsageError('synthesize_diagonal needs a diagonal coefficient matrix')
    result = homogeneous_feasibility(target, gamma)
    if not result.feasible:
        raise InfeasibleError(result.reason)
    diagonal = np.diag(target.matrix)
    if not np.any(diagonal):
        return SynthesisResult(ControlSequence.identity(n_qubits), 0.0, 0.0, (0.0, 0.0, 0.0))
    total = float(np.sum(diagonal))
    weights = tuple(float(v) / total for v in diagonal)
    sequence = ControlSequence.from_weights(
        [weights[axis] for _, _, axis in _DIAGONAL_FRAMES],
        [LocalLayer.homogeneous(u, n_qubits) for _, u, _ in _DIAGONAL_FRAMES],
    )
    return SynthesisResult(sequence, result.time_cost, result.time_cost, weights)


# single-qubit maps Z -> ±σ_axis
_FRAME_UNITARIES = {
    ('X', 1): SQRT_Y,
    ('X', -1): SQRT_Y_DAG,
    ('Y', 1): SQRT_X_DAG,
    ('Y', -1): SQRT_X,
    ('Z', 1): SingleQubitUnitary.identity(),
    ('Z', -1): SingleQubitUnitary.pauli('X'),
}


def pauli_frame_sequence(M, gamma, pair=(0, 1), n_qubits=2):
    """One Pauli-frame step per non-zero entry M_ij, weight |M_ij|/Σ|M|.

    Achieves c = Σ|M_ij|/|γ| for any real M, which is never below the
    singular-value optimum reported alongside it.
    """
    _check_gamma(gamma)
    a, b = pair
    m = M.matrix
    one_norm = float(np.sum(np.abs(m)))
    optimal = inhomogeneous_cost(M, gamma)
    if one_norm == 0.0:
        return SynthesisResult(ControlSequence.identity(n_qubits), 0.0, optimal)
    weights, layers = [], []
    for i, left in enumerate(AXES):
        for j, right in enumerate(AXES):
            value = m[i, j]
            if value == 0.0:
                continue
            sign = 1 if np.sign(value) == np.sign(gamma) else -1
            layers.append(LocalLayer.on_qubits(n_qubits, {
                a: _FRAME_UNITARIES[(left, sign)],
                b: _FRAME_UNITARIES[(right, 1)],
            }))
            weights.append(abs(value) / one_norm)
    time_cost = one_norm / abs(gamma)
    logger.debug('Pauli-frame sequence on %s: %d steps, c=%.6g (optimum %.6g)',
                 pair, len(layers), time_cost, optimal)
    return SynthesisResult(ControlSequence.from_weights(weights, layers), time_cost, optimal)
