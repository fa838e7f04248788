"""
Named spin models and the site geometries they live on.

    dipole        ½ Σ_{a≠b} J/d³ (σ+σ- + σ-σ+)      all pairs
    ising         -J/2 Σ_<ab> Z Z                   bonds
    heisenberg    -J/2 Σ_<ab> (XX + YY + ZZ)        bonds
    random_ising  -½ Σ_<ab> J_ab Z Z + Σ_a B_a X     bonds

ising and heisenberg take an optional homogeneous field B Σ_a (n·σ).
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hardware.lattice import LatticeModel, geometry_remap
from pauli_core.hamiltonian import Hamiltonian, HamiltonianBuilder
from pauli_core.paulis import PauliString
from uqsim_backend.errors import ConfigPolicyError, UsageError

logger = logging.getLogger(__name__)

MODEL_NAMES = ('dipole', 'ising', 'heisenberg', 'random_ising')
COUPLING_DISTRIBUTIONS = ('uniform', 'normal')


@dataclass(frozen=True)
class SiteGeometry:
    positions: tuple
    bonds: tuple

    def __post_init__(self):
        positions = tuple(tuple(float(x) for x in np.atleast_1d(p)) for p in self.positions)
        if not positions:
            raise UsageError('Geometry needs at least one site')
        bonds = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.bonds)
        for a, b in bonds:
            if a == b or not (0 <= a < len(positions) and 0 <= b < len(positions)):
                raise UsageError(f'Invalid bond ({a}, {b}) for {len(positions)} sites')
        object.__setattr__(self, 'positions', positions)
        object.__setattr__(self, 'bonds', bonds)

    @classmethod
    def chain(cls, n_sites, spacing=1.0, periodic=False):
        bonds = [(a, a + 1) for a in range(n_sites - 1)]
        if periodic and n_sites > 2:
            bonds.append((0, n_sites - 1))
        return cls(tuple((spacing * a,) for a in range(n_sites)), tuple(bonds))

    @classmethod
    def grid(cls, rows, cols, pattern='rectangular'):
        """Sites on a rectangular array; ``pattern`` picks the neighbour bonds."""
        base = LatticeModel.grid(rows, cols)
        positions = tuple((float(c), float(r)) for r in range(rows) for c in range(cols))
        return cls(positions, tuple(geometry_remap(pattern, base)))

    @classmethod
    def from_hardware(cls, hw):
        """Trap positions as placed, lattice sites at unit spacing with nearest-neighbour bonds."""
        if isinstance(hw, LatticeModel):
            if hw.dims == 1:
                return cls.chain(hw.n_sites, periodic=hw.boundary == 'periodic')
            return cls.grid(*hw.shape, pattern='triangular' if hw.diagonal else 'rectangular')
        positions = hw.positions
        bonds = [(a, b) for a, b in itertools.combinations(range(len(positions)), 2)
                 if abs(math.dist(positions[a], positions[b]) - 1.0) < 1e-9]
        return cls(positions, tuple(bonds))

    @property
    def n_sites(self):
        return len(self.positions)

    def distance(self, a, b):
        return math.dist(self.positions[a], self.positions[b])


@dataclass(frozen=True)
class NamedModel:
    name: str
    J: float = 1.0
    B: float = 0.0
    direction: tuple = (0.0, 0.0, 1.0)
    fields: tuple = ()
    couplings: dict = field(default_factory=dict, hash=False)
    seed: Optional[int] = None
    distribution: str = 'uniform'

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise UsageError(f'Unknown model {self.name!r}; expected one of {", ".join(MODEL_NAMES)}')
        if self.distribution not in COUPLING_DISTRIBUTIONS:
            raise UsageError(f'Unknown coupling distribution {self.distribution!r}')
        n = np.asarray(self.direction, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-10:
            raise UsageError(f'Field direction must be a unit 3-vector, got {self.direction}')
        couplings = {tuple(sorted(map(int, pair))): float(j) for pair, j in dict(self.couplings).items()}
        object.__setattr__(self, 'couplings', couplings)
        object.__setattr__(self, 'fields', tuple(float(b) for b in self.fields))

    def bond_couplings(self, geometry):
        """J_ab per bond: given explicitly, or drawn with scale J from ``seed``."""
        if self.couplings:
            missing = [bond for bond in geometry.bonds if bond not in self.couplings]
            if missing:
                raise UsageError(f'random_ising couplings missing for bonds {missing}')
            extra = set(self.couplings) - set(geometry.bonds)
            if extra:
                raise UsageError(f'random_ising couplings given for non-bonds {sorted(extra)}')
            return {bond: self.couplings[bond] for bond in geometry.bonds}
        if self.seed is None:
            raise ConfigPolicyError('random_ising needs explicit couplings or a seed to draw them')
        rng = np.random.Generator(np.random.PCG64DXSM(self.seed))
        if self.distribution == 'uniform':
            values = rng.uniform(-abs(self.J), abs(self.J), len(geometry.bonds))
        else:
            values = rng.normal(0.0, abs(self.J), len(geometry.bonds))
        logger.info('Drew %d random_ising couplings from seed %d', len(values), self.seed)
        return dict(zip(geometry.bonds, (float(v) for v in values)))


def _zz(n, a, b, coeff):
    return PauliString.on_sites(n, {a: 'Z', b: 'Z'}, coeff)


def _field_terms(n, strengths, direction):
    for qubit, strength in enumerate(strengths):
        for axis, component in zip('XYZ', direction):
            if strength and component:
                yield PauliString.on_sites(n, {qubit: axis}, strength * component)


def build_model(spec, geometry):
    n = geometry.n_sites
    if spec.name == 'dipole':
        builder = HamiltonianBuilder(n)
        for a, b in itertools.permutations(range(n), 2):
            weight = 0.5 * spec.J / geometry.distance(a, b) ** 3
            builder.add(weight, {a: '+', b: '-'}).add(weight, {a: '-', b: '+'})
        h = builder.build()
        if spec.B:
            h = h + Hamiltonian.from_terms(n, _field_terms(n, [spec.B] * n, spec.direction))
        return h
    if not geometry.bonds:
        raise UsageError(f'{spec.name} needs a geometry with neighbour bonds')
    if spec.name == 'ising':
        terms = [_zz(n, a, b, -spec.J / 2) for a, b in geometry.bonds]
        terms += _field_terms(n, [spec.B] * n, spec.direction)
        return Hamiltonian.from_terms(n, terms)
    if spec.name == 'heisenberg':
        terms = [
            PauliString.on_sites(n, {a: op, b: op}, -spec.J / 2)
            for a, b in geometry.bonds for op in 'XYZ'
        ]
        terms += _field_terms(n, [spec.B] * n, spec.direction)
        return Hamiltonian.from_terms(n, terms)
    couplings = spec.bond_couplings(geometry)
    if spec.fields and len(spec.fields) != n:
        raise UsageError(f'random_ising needs {n} fields B_a, got {len(spec.fields)}')
    fields = spec.fields or (spec.B,) * n
    terms = [_zz(n, a, b, -0.5 * j) for (a, b), j in couplings.items()]
    terms += _field_terms(n, fields, (1.0, 0.0, 0.0))
    return Hamiltonian.from_terms(n, terms)


def initial_hamiltonian(name, geometry):
    """Start of an adiabatic path: Σ Z Z or Σ X X over the bonds, or the transverse field Σ X."""
    n = geometry.n_sites
    if name == 'x_field':
        return Hamiltonian.from_terms(n, (PauliString.on_sites(n, {q: 'X'}) for q in range(n)))
    ops = {'zz_chain': 'Z', 'xx_chain': 'X'}.get(name)
    if ops is None:
        raise UsageError(f'Unknown initial Hamiltonian {name!r}; expected zz_chain, xx_chain or x_field')
    if not geometry.bonds:
        raise UsageError(f'{name} needs a geometry with neighbour bonds')
    return Hamiltonian.from_terms(n, (PauliString.on_sites(n, {a: ops, b: ops}) for a, b in geometry.bonds))
