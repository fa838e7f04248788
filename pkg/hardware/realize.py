"""
Bind an abstract schedule to a platform: check it is realisable and, on the
trap array, pack consecutive push gates into concurrent groups.
"""
import logging

from avg_compiler.schedule import ApplyLocal, RawGate
from uqsim_backend.errors import HardwareConstraintError, UsageError
from .lattice import ADDRESSABILITY, LatticeModel
from .traps import TrapArrayModel, crosstalk_report

logger = logging.getLogger(__name__)

PUSH_IDS = ('push', 'crosstalk')


def realize_schedule(abstract, hw):
    if abstract.n_qubits != hw.n_qubits:
        raise UsageError(f'Schedule acts on {abstract.n_qubits} qubits, hardware has {hw.n_qubits}')
    if isinstance(hw, LatticeModel):
        cycle, notes = _realize_lattice(abstract.cycle, hw)
    elif isinstance(hw, TrapArrayModel):
        cycle, notes = _realize_traps(abstract.cycle, hw)
    else:
        raise UsageError(f'Unknown hardware model {type(hw).__name__}')
    return abstract.replace(cycle=cycle, hardware=hw.name, notes=abstract.notes + tuple(notes))


def _realize_lattice(cycle, model):
    classes = {gate_id: frozenset(map(frozenset, pairs)) for gate_id, pairs in model.translation_classes().items()}
    round_trips = 0
    for instruction in cycle:
        if isinstance(instruction, ApplyLocal):
            if not model.addressable and not instruction.layer.uniform():
                raise HardwareConstraintError(f'Inhomogeneous local layer {ADDRESSABILITY}')
            continue
        if instruction.gate_id not in classes:
            raise HardwareConstraintError(f'Gate {instruction.gate_id} is not an available lattice displacement')
        if frozenset(map(frozenset, instruction.targets)) != classes[instruction.gate_id]:
            raise HardwareConstraintError(
                f'Gate {instruction.gate_id} must act on its whole translation class; '
                f'a partial class {ADDRESSABILITY}'
            )
        if set(instruction.weights) != {1.0}:
            raise HardwareConstraintError(f'Lattice gate {instruction.gate_id} cannot weight bonds differently')
        round_trips += 1
    logger.info('Lattice schedule: %d displacement round trips per cycle', round_trips)
    return cycle, [f'lattice round trips per cycle: {round_trips}']


def _pack(model, gates):
    """Greedy slots for a run of commuting push gates, leftmost ions first."""
    slots = []
    for gate in sorted(gates, key=lambda g: (min(g.qubits), sorted(g.qubits))):
        for slot in slots:
            used = set().union(*(g.qubits for g in slot))
            if used & gate.qubits:
                continue
            groups = [sorted(g.qubits) for g in slot] + [sorted(gate.qubits)]
            if crosstalk_report(model, groups).concurrent:
                slot.append(gate)
                break
        else:
            slots.append([gate])
    return slots


def _crosstalk_gate(model, slot):
    """Parasitic ZZ picked up between gates pushed together, as one extra gate."""
    targets, weights = [], []
    for i, g in enumerate(slot):
        for h in slot[i + 1:]:
            overlap = min(abs(g.theta), abs(h.theta)) / abs(model.gamma)
            sign = 1.0 if g.theta * model.gamma >= 0 else -1.0
            for a in sorted(g.qubits):
                for b in sorted(h.qubits):
                    targets.append((min(a, b), max(a, b)))
                    weights.append(sign * model.inverse_cube(a, b) * overlap)
    return RawGate('crosstalk', model.gamma, tuple(targets), tuple(weights))


def _realize_traps(cycle, model):
    realized, run = [], []
    concurrent_groups = 0

    def flush():
        nonlocal concurrent_groups
        if not run:
            return
        for slot_index, slot in enumerate(_pack(model, run)):
            realized.extend(g.with_slot(slot_index) for g in slot)
            if len(slot) > 1:
                concurrent_groups += 1
                if model.crosstalk_realism:
                    realized.append(_crosstalk_gate(model, slot).with_slot(slot_index))
        run.clear()

    for instruction in cycle:
        if isinstance(instruction, RawGate):
            if instruction.gate_id not in PUSH_IDS:
                raise HardwareConstraintError(f'Trap array has no gate {instruction.gate_id!r}')
            if instruction.gate_id == 'push' and len(instruction.targets) == 1:
                run.append(instruction)
                continue
            flush()
            realized.append(instruction)
        else:
            flush()
            realized.append(instruction)
    flush()
    logger.info('Trap schedule: %d concurrent push groups per cycle', concurrent_groups)
    return tuple(realized), [f'concurrent push groups per cycle: {concurrent_groups}']
