"""
Addressing one atom with beams that also hit its neighbours.

Beam k is centred on atom k and reaches atom j with relative intensity
f(|r_j - r_k|). Beam a (the target) runs with flipped phase. Solving
τ_j = ν₀ Σ_k t_k f(|r_j - r_k|) (-1)^{δ_ka} with τ_j = τ δ_ja gives
durations whose combined rotations act on atom a only.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import NumericFailure, SingularSystemError, UsageError

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
RESIDUAL_TOL = 1e-8


def gaussian_profile(width):
    def f(r):
        return math.exp(-r * r / (2.0 * width * width))
    return f


@dataclass(frozen=True)
class BeamCompensation:
    durations: tuple
    angles: tuple
    condition_number: float
    residual: float
    negative: tuple

    def rotations(self):
        """Per-atom rotations exp(-i τ_j σx) produced by the solved durations."""
        return LocalLayer.inhomogeneous(SingleQubitUnitary.rotation('x', angle) for angle in self.angles)

    def as_dict(self):
        return {
            'durations': list(self.durations),
            'angles': list(self.angles),
            'condition_number': self.condition_number,
            'residual': self.residual,
            'negative_durations': list(self.negative),
        }


def beam_compensation(positions, target, tau, nu0=1.0, profile=None, width=1.5):
    coords = np.array([np.atleast_1d(p) for p in positions], dtype=float)
    n = len(coords)
    if not 0 <= target < n:
        raise UsageError(f'Target atom {target} outside 0..{n - 1}')
    if nu0 == 0:
        raise UsageError('Beam coupling nu0 must be nonzero')
    f = profile or gaussian_profile(width)
    if abs(f(0.0) - 1.0) > 1e-12:
        raise UsageError('Beam profile must satisfy f(0) = 1')
    distances = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)
    signs = np.ones(n)
    signs[target] = -1.0
    A = nu0 * np.vectorize(f)(distances) * signs[None, :]
    condition = float(np.linalg.cond(A))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularSystemError(
            f'Beam compensation system is singular or ill-conditioned (condition number {condition:.3e})'
        )
    rhs = np.zeros(n)
    rhs[target] = tau
    try:
        t = linalg.solve(A, rhs)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(f'Beam compensation system cannot be solved: {exc}') from None
    angles = A @ t
    residual = float(np.linalg.norm(angles - rhs))
    if residual > RESIDUAL_TOL * max(1.0, abs(tau)):
        raise NumericFailure(f'Beam compensation residual {residual:.3e} exceeds tolerance')
    negative = tuple(int(k) for k in np.flatnonzero(t < 0))
    if negative:
        logger.warning('Beam compensation needs negative durations on beams %s', list(negative))
    logger.debug('Beam compensation for atom %d: cond=%.3e residual=%.3e', target, condition, residual)
    return BeamCompensation(tuple(float(x) for x in t), tuple(float(x) for x in angles),
                            condition, residual, negative)
