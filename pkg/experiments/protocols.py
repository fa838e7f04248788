"""
Per-model simulation protocols: which raw gates make up one cycle and which
published local sequence wraps them.

A protocol is a list of blocks, each a control sequence around a set of raw
gates whose angles are given per unit base angle. Its effective Hamiltonian
per unit angle equals ``scale`` times the model's two-body part, so a cycle
simulating a time dt runs the gates at base angle dt / scale.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from avg_compiler.schedule import ApplyLocal, PulseSchedule, RawGate, compact
from avg_compiler.sequences import ControlSequence, effective_hamiltonian, local_evolution_layer, protocol_library
from avg_compiler.trotter import plan_cycle
from hardware.lattice import ADDRESSABILITY, LatticeModel, uqs1_gate
from hardware.realize import realize_schedule
from hardware.traps import push_gate
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import HardwareConstraintError, InfeasibleError, SizeMismatchError, UsageError
from .spin_models import SiteGeometry, build_model

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 8
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class ProtocolBlock:
    sequence: ControlSequence
    gates: tuple

    def generator(self, n_qubits):
        raw = Hamiltonian.zero(n_qubits)
        for gate in self.gates:
            raw = raw + gate.generator(n_qubits)
        return effective_hamiltonian(self.sequence, raw)

    def instructions(self, angle):
        out = []
        for p, layer in self.sequence.steps:
            out.append(ApplyLocal(layer.dagger()))
            out.extend(gate.with_theta(gate.theta * p * angle) for gate in self.gates)
            out.append(ApplyLocal(layer))
        return out


@dataclass(frozen=True)
class ModelProtocol:
    model: str
    hardware: object
    target: Hamiltonian
    blocks: tuple
    scale: float
    exact: bool
    rounds: tuple = ()
    frequency_plan: tuple = ()

    @property
    def n_qubits(self):
        return self.target.n_qubits

    @property
    def local(self):
        return self.target.local_part()

    def _rounds(self):
        return self.rounds or (tuple(range(len(self.blocks))),)

    def effective_hamiltonian(self):
        """Two-body Hamiltonian generated per unit base angle over one full cycle."""
        total = Hamiltonian.zero(self.n_qubits)
        for firing in self._rounds():
            for index in firing:
                total = total + self.blocks[index].generator(self.n_qubits)
        return total

    def cycle(self, dt):
        rounds = self._rounds()
        angle = dt / self.scale
        out = []
        for firing in rounds:
            if not self.local.is_zero():
                out.append(ApplyLocal(local_evolution_layer(self.local, dt / len(rounds))))
            for index in firing:
                out.extend(self.blocks[index].instructions(angle))
        return compact(out)

    def schedule(self, T_prime, dt):
        """Realised schedule of ceil(T′/dt) cycles covering simulated time T′."""
        if not dt > 0 or T_prime < 0:
            raise UsageError(f'Need dt > 0 and T′ >= 0, got dt={dt}, T′={T_prime}')
        ratio = T_prime / dt
        cycles = math.ceil(ratio - 1e-9 * max(1.0, ratio))
        if cycles == 0:
            return PulseSchedule.empty(self.n_qubits, hardware=self.hardware.name)
        notes = (f'protocol {self.model}: scale {self.scale!r}, exact {self.exact}',)
        schedule = PulseSchedule(self.n_qubits, self.cycle(T_prime / cycles), cycles,
                                 hardware=self.hardware.name, notes=notes)
        return realize_schedule(schedule, self.hardware)


def _lattice_dipole_gates(hw):
    gates = []
    axes = (None,) if hw.dims == 1 else ('h', 'v')
    for j in sorted(hw.available_j):
        for axis in axes:
            try:
                gates.append(uqs1_gate(hw, j, j ** -3.0, axis).gate)
            except HardwareConstraintError:
                logger.info('Displacement j=%d does not fit along %s; dipole sum truncated', j, axis)
    return tuple(gates)


def _bond_gates(hw, geometry):
    """Raw gates with unit angle on every nearest-neighbour bond of ``geometry``."""
    bonds = {frozenset(bond) for bond in geometry.bonds}
    if isinstance(hw, LatticeModel):
        classes = {gid: pairs for gid, pairs in hw.translation_classes().items()
                   if gid in ('K1', 'K1h', 'K1v', 'K1d')}
        covered = {frozenset(pair) for pairs in classes.values() for pair in pairs}
        if covered != bonds:
            raise HardwareConstraintError(
                'Nearest-neighbour displacements of the lattice do not match the model bonds'
            )
        return tuple(RawGate(gid, 1.0, pairs) for gid, pairs in sorted(classes.items()))
    gates = []
    for a, b in geometry.bonds:
        gate = push_gate(hw, [a, b], 1.0)
        gates.append(gate.with_theta(1.0 / gate.weights[0]))
    return tuple(gates)


def frequency_plan(couplings, resolution=DEFAULT_RESOLUTION):
    """Firings per cycle for each bond, proportional to |J_ab| with the largest at ``resolution``."""
    if resolution < 1:
        raise UsageError('Frequency resolution must be at least 1')
    largest = max((abs(j) for j in couplings.values()), default=0.0)
    if largest == 0:
        return {bond: 0 for bond in couplings}
    return {bond: int(round(resolution * abs(j) / largest)) for bond, j in couplings.items()}


def firing_rounds(counts, resolution):
    """Spread each bond's firings evenly over ``resolution`` rounds."""
    rounds = []
    for r in range(resolution):
        rounds.append(tuple(
            index for index, count in enumerate(counts)
            if (r + 1) * count // resolution > r * count // resolution
        ))
    return tuple(rounds)


def _frequency_blocks(hw, target, geometry, resolution):
    n = hw.n_qubits
    sign_gamma = math.copysign(1.0, hw.gamma)
    couplings = {bond: target.coefficient(_zz_ops(n, *bond)) for bond in geometry.bonds}
    counts = frequency_plan(couplings, resolution)
    blocks, plan = [], []
    for (a, b), count in counts.items():
        if count == 0:
            logger.warning('Bond (%d, %d) coupling too weak for resolution %d; dropped', a, b, resolution)
            continue
        gate = push_gate(hw, [a, b], 1.0)
        gate = gate.with_theta(sign_gamma / gate.weights[0])
        if np.sign(couplings[(a, b)]) == sign_gamma:
            sequence = ControlSequence.identity(n)
        else:
            sequence = ControlSequence(((1.0, LocalLayer.on_qubits(n, {a: SingleQubitUnitary.pauli('X')})),))
        blocks.append(ProtocolBlock(sequence, (gate,)))
        plan.append(((a, b), count))
    return tuple(blocks), firing_rounds([count for _, count in plan], resolution), tuple(plan)


def _zz_ops(n, a, b):
    return tuple('Z' if q in (a, b) else 'I' for q in range(n))


def _trotter_blocks(hw, target):
    plan = plan_cycle(target, hw)
    return tuple(
        ProtocolBlock(fp.synthesis.sequence,
                      (RawGate(fp.family.gate_id, fp.family.gamma * fp.time_cost, fp.family.targets,
                               fp.family.weights),))
        for fp in plan.families
    )


def _scale(effective, target):
    """s with effective = s·target, taken on the strongest effective term."""
    if effective.is_zero() or target.is_zero():
        if effective.is_zero() and target.is_zero():
            return 1.0
        raise HardwareConstraintError('Protocol does not produce the model interaction')
    pivot = max(effective.terms, key=lambda t: abs(t.coeff))
    wanted = target.coefficient(pivot.ops)
    if wanted == 0:
        raise HardwareConstraintError(f'Protocol produces {pivot.label}, which the model lacks')
    return pivot.coeff / wanted


def _check_angle_signs(blocks, scale, gamma):
    for block in blocks:
        for gate in block.gates:
            angle = gate.theta / scale
            if angle != 0 and np.sign(angle) != np.sign(gamma):
                raise InfeasibleError(
                    f'Gate {gate.gate_id} would need an angle of sign {int(np.sign(angle))}, against '
                    f'the sign of gamma={gamma}; the model coupling has the wrong sign for this platform'
                )


def protocol_for_model(spec, hw, geometry=None, resolution=DEFAULT_RESOLUTION):
    geometry = geometry or SiteGeometry.from_hardware(hw)
    if geometry.n_sites != hw.n_qubits:
        raise SizeMismatchError(f'Geometry has {geometry.n_sites} sites, hardware {hw.n_qubits} qubits')
    target = build_model(spec, geometry)
    hw.check_local(target.local_part())
    n = hw.n_qubits
    two_body = target.two_body_part()
    rounds, plan = (), ()
    allow_inexact = False
    if spec.name == 'dipole':
        if isinstance(hw, LatticeModel):
            gates = _lattice_dipole_gates(hw)
            allow_inexact = True
        else:
            gates = (push_gate(hw, range(n), 1.0),)
        blocks = (ProtocolBlock(protocol_library('xy2', n), gates),)
    elif spec.name in ('ising', 'heisenberg'):
        sequence = protocol_library('identity' if spec.name == 'ising' else 'heisenberg3', n)
        blocks = (ProtocolBlock(sequence, _bond_gates(hw, geometry)),)
    elif isinstance(hw, LatticeModel):
        if not hw.addressable:
            raise HardwareConstraintError(f'random_ising {ADDRESSABILITY}')
        blocks = _trotter_blocks(hw, two_body)
    else:
        blocks, rounds, plan = _frequency_blocks(hw, two_body, geometry, resolution)
        allow_inexact = True
    protocol = ModelProtocol(spec.name, hw, target, blocks, 1.0, True, rounds, plan)
    effective = protocol.effective_hamiltonian()
    scale = _scale(effective, two_body)
    exact = (scale * two_body).isclose(effective, EXACT_TOL * max(1.0, abs(scale)))
    if not exact and not allow_inexact:
        raise HardwareConstraintError(f'{spec.name} protocol on {hw.name} does not reproduce the model')
    if not exact:
        logger.warning('%s protocol on %s approximates the model (truncated or quantised couplings)',
                       spec.name, hw.name)
    _check_angle_signs(blocks, scale, hw.gamma)
    logger.info('Protocol %s on %s: %d blocks, scale %.6g', spec.name, hw.name, len(blocks), scale)
    return ModelProtocol(spec.name, hw, target, blocks, scale, exact, rounds, plan)
