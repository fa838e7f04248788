"""
UQS2: ions in individual microtraps.

A state-dependent push on a set of ions produces a ZZ phase between every
pushed pair that falls off as d⁻³, so pushing one pair is a raw gate with
coupling γ·d⁻³ and anything else pushed at the same time leaks in as crosstalk.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from avg_compiler.schedule import RawGate
from pauli_core.coeff import CoeffMatrix, pair_coeff_matrix
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.paulis import PauliString
from uqsim_backend.errors import UsageError
from .base import GateFamily

logger = logging.getLogger(__name__)

DEFAULT_CROSSTALK_THRESHOLD = 1e-3


@dataclass(frozen=True)
class TrapArrayModel:
    """Trap positions in units of the nearest-neighbour spacing d."""

    positions: tuple
    kappa: float = 1.0
    crosstalk_threshold: float = DEFAULT_CROSSTALK_THRESHOLD
    gamma: float = 1.0
    crosstalk_realism: bool = False

    name = 'uqs2'
    allows_inhomogeneous = True

    def __post_init__(self):
        positions = tuple(
            (float(p),) if np.ndim(p) == 0 else tuple(float(x) for x in p)
            for p in self.positions
        )
        if not positions:
            raise UsageError('Trap array needs at least one ion')
        if len({len(p) for p in positions}) != 1 or len(positions[0]) not in (1, 2):
            raise UsageError('Trap positions must all be 1D or all 2D coordinates')
        object.__setattr__(self, 'positions', positions)
        for a, b in itertools.combinations(range(len(positions)), 2):
            if self.distance(a, b) < 1.0 - 1e-12:
                raise UsageError(f'Ions {a} and {b} are closer than one trap spacing')
        if not self.crosstalk_threshold > 0:
            raise UsageError('Crosstalk threshold must be positive')
        if self.gamma == 0:
            raise UsageError('Raw coupling gamma must be nonzero')

    @classmethod
    def chain(cls, n_ions, spacing=1.0, **kwargs):
        return cls(tuple((spacing * k,) for k in range(n_ions)), **kwargs)

    @property
    def n_qubits(self):
        return len(self.positions)

    def distance(self, a, b):
        return math.dist(self.positions[a], self.positions[b])

    def inverse_cube(self, a, b):
        return self.distance(a, b) ** -3

    def _check_ions(self, ions):
        bad = [q for q in ions if not 0 <= q < self.n_qubits]
        if bad:
            raise UsageError(f'Ion indices {bad} outside 0..{self.n_qubits - 1}')

    def families(self, two_body):
        """One push family per coupled pair, coupling γ·d_ab⁻³."""
        pairs = sorted({tuple(sorted(term.support)) for term in two_body.terms})
        families = []
        for a, b in pairs:
            m = pair_coeff_matrix(two_body, a, b)
            if m.is_zero():
                continue
            w = self.inverse_cube(a, b)
            families.append(GateFamily('push', ((a, b),), (w,), self.gamma, self.gamma * w,
                                       CoeffMatrix.from_array(m.matrix), (a, b)))
        return families

    def check_local(self, local):
        pass

    def check_layer(self, layer):
        pass


def _pushed_pairs(model, pushed):
    ions = sorted(set(pushed))
    model._check_ions(ions)
    if len(ions) < 2:
        raise UsageError('A push gate needs at least two ions')
    return list(itertools.combinations(ions, 2))


def uqs2_push(model, pushed, theta_base):
    """θ_base·Σ_{a<b} d_ab⁻³ Z_a Z_b over every pair of pushed ions."""
    return Hamiltonian.from_terms(model.n_qubits, (
        PauliString.on_sites(model.n_qubits, {a: 'Z', b: 'Z'}, theta_base * model.inverse_cube(a, b))
        for a, b in _pushed_pairs(model, pushed)
    ))


def push_gate(model, pushed, theta_base, gate_id='push'):
    pairs = _pushed_pairs(model, pushed)
    return RawGate(gate_id, theta_base, pairs, tuple(model.inverse_cube(a, b) for a, b in pairs))


@dataclass(frozen=True)
class PulseProfile:
    """Push strength f(t) in [0, 1] sampled every ``dt``."""

    samples: tuple
    dt: float

    def __post_init__(self):
        samples = tuple(float(f) for f in self.samples)
        if len(samples) < 2:
            raise UsageError('Pulse profile needs at least two samples')
        if not self.dt > 0:
            raise UsageError(f'Sample spacing must be positive, got {self.dt}')
        if min(samples) < -1e-12 or max(samples) > 1 + 1e-12:
            raise UsageError('Pulse profile values must lie in [0, 1]')
        object.__setattr__(self, 'samples', samples)
        if samples[0] != 0.0 or samples[-1] != 0.0:
            logger.warning('Pulse profile does not start and end at zero; the push does not return')

    @classmethod
    def from_function(cls, f, duration, dt):
        count = int(round(duration / dt))
        return cls(tuple(f(k * dt) for k in range(count + 1)), dt)

    @classmethod
    def rectangular(cls, duration, dt):
        return cls.from_function(lambda t: 1.0, duration, dt)

    @classmethod
    def triangular(cls, duration, dt):
        return cls.from_function(lambda t: max(0.0, 1.0 - abs(2.0 * t / duration - 1.0)), duration, dt)

    @property
    def duration(self):
        return self.dt * (len(self.samples) - 1)


def theta_from_pulse(fA, fB, model, dist):
    """θ = -κ·dist⁻³·∫ fA(t) fB(t) dt, the ZZ phase left after a push and return."""
    if len(fA.samples) != len(fB.samples) or fA.dt != fB.dt:
        raise UsageError('Pulse profiles must share sample count and spacing')
    if dist < 1.0 - 1e-12:
        raise UsageError(f'Ion distance {dist} below one trap spacing')
    overlap = integrate.trapezoid(np.multiply(fA.samples, fB.samples), dx=fA.dt)
    return -model.kappa * dist ** -3 * float(overlap)


@dataclass(frozen=True)
class CrosstalkReport:
    ratios: tuple
    max_ratio: float
    threshold: float
    concurrent: bool

    def as_dict(self):
        return {
            'ratios': [{'groups': list(groups), 'ratio': ratio} for groups, ratio in self.ratios],
            'max_ratio': self.max_ratio,
            'threshold': self.threshold,
            'verdict': 'concurrent' if self.concurrent else 'serialized',
        }


def crosstalk_report(model, pair_groups, threshold=None):
    """Largest parasitic coupling between groups relative to the weaker intended one."""
    threshold = model.crosstalk_threshold if threshold is None else threshold
    groups = [tuple(sorted(set(g))) for g in pair_groups]
    for g in groups:
        model._check_ions(g)
    seen = set()
    for g in groups:
        if seen & set(g):
            raise UsageError(f'Pushed groups overlap on ions {sorted(seen & set(g))}')
        seen |= set(g)
    intended = [
        min((model.inverse_cube(a, b) for a, b in itertools.combinations(g, 2)), default=0.0)
        for g in groups
    ]
    ratios = []
    for i, j in itertools.combinations(range(len(groups)), 2):
        parasitic = max(model.inverse_cube(a, b) for a in groups[i] for b in groups[j])
        reference = min(intended[i], intended[j])
        ratio = parasitic / reference if reference > 0 else math.inf
        ratios.append(((i, j), ratio))
    max_ratio = max((r for _, r in ratios), default=0.0)
    return CrosstalkReport(tuple(ratios), max_ratio, threshold, max_ratio < threshold)
