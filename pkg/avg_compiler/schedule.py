"""
Pulse schedules: one Trotter cycle of instructions repeated L times.

Text form (``uqs-schedule/1``)::

    # uqs-schedule/1 endianness=little
    SCHEDULE n_qubits=3 repetitions=900 hardware=uqs1
    COST time_cost=3.0 n=3 L=900 step_t=0.0033 chi=900.0 epsilon=0.01 T_prime=1.0
    LOCAL H <re im re im re im re im>
    LOCAL I <re im ...> | <re im ...> | ...
    GATE K1 0.001 0-1,1-2 slot=0

``LOCAL H`` carries one unitary applied to every qubit, ``LOCAL I`` one per
qubit. Gate targets are ``a-b`` pairs with an optional ``:weight``; the gate
is exp(-i·theta·Σ w Z_a Z_b).
"""
import math
from dataclasses import dataclass, field
from typing import Optional

from pauli_core.hamiltonian import Hamiltonian
from pauli_core.paulis import PauliString
from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import ParseError, SizeMismatchError, UsageError

FORMAT_TAG = 'uqs-schedule/1'


@dataclass(frozen=True)
class ApplyLocal:
    layer: LocalLayer


@dataclass(frozen=True)
class RawGate:
    gate_id: str
    theta: float
    targets: tuple
    weights: tuple = ()
    slot: int = 0

    def __post_init__(self):
        if not self.gate_id or any(c.isspace() for c in self.gate_id):
            raise UsageError(f'Invalid gate id {self.gate_id!r}')
        if not math.isfinite(self.theta):
            raise UsageError(f'Gate angle must be finite, got {self.theta}')
        targets = tuple((int(a), int(b)) for a, b in self.targets)
        if not targets:
            raise UsageError(f'Gate {self.gate_id} has no targets')
        for a, b in targets:
            if a == b:
                raise UsageError(f'Gate {self.gate_id} couples qubit {a} to itself')
        weights = tuple(float(w) for w in self.weights) or (1.0,) * len(targets)
        if len(weights) != len(targets):
            raise UsageError(f'Gate {self.gate_id} has {len(targets)} targets but {len(weights)} weights')
        object.__setattr__(self, 'theta', float(self.theta))
        object.__setattr__(self, 'targets', targets)
        object.__setattr__(self, 'weights', weights)

    def zz_angles(self):
        """(a, b, angle) per target, the angle multiplying Z_a Z_b."""
        return [(a, b, self.theta * w) for (a, b), w in zip(self.targets, self.weights)]

    def generator(self, n_qubits):
        return Hamiltonian.from_terms(n_qubits, (
            PauliString.on_sites(n_qubits, {a: 'Z', b: 'Z'}, angle) for a, b, angle in self.zz_angles()
        ))

    def with_theta(self, theta):
        return RawGate(self.gate_id, theta, self.targets, self.weights, self.slot)

    def with_slot(self, slot):
        return RawGate(self.gate_id, self.theta, self.targets, self.weights, slot)

    @property
    def qubits(self):
        return frozenset(q for pair in self.targets for q in pair)


@dataclass(frozen=True)
class CostReport:
    time_cost: float
    n: int
    L: int
    step_t: float
    chi: float
    epsilon: float
    T_prime: float
    optimal_time_cost: Optional[float] = None

    @classmethod
    def from_budget(cls, time_cost, n, T_prime, epsilon, optimal_time_cost=None, L=None):
        """Apply L = ceil(c²T′²/ε), step_t = cT′/L and chi = nL/T."""
        if not epsilon > 0:
            raise UsageError(f'Error budget epsilon must be positive, got {epsilon}')
        if T_prime < 0:
            raise UsageError(f'Simulated time must be nonnegative, got {T_prime}')
        if time_cost < 0:
            raise UsageError(f'Time cost must be nonnegative, got {time_cost}')
        total = time_cost * T_prime
        if L is None:
            ratio = time_cost ** 2 * T_prime ** 2 / epsilon
            # absorb representation error so exact ratios are not rounded up
            L = math.ceil(ratio - 1e-9 * max(1.0, ratio)) if total > 0 else 0
        if total == 0 or L == 0:
            return cls(float(time_cost), n, int(L), 0.0, 0.0, float(epsilon), float(T_prime), optimal_time_cost)
        return cls(float(time_cost), n, int(L), total / L, n * L / total,
                   float(epsilon), float(T_prime), optimal_time_cost)

    @property
    def T(self):
        return self.time_cost * self.T_prime

    def as_dict(self):
        data = {
            'time_cost': self.time_cost,
            'n': self.n,
            'L': self.L,
            'step_t': self.step_t,
            'chi': self.chi,
            'epsilon': self.epsilon,
            'T_prime': self.T_prime,
            'T': self.T,
        }
        if self.optimal_time_cost is not None:
            data['optimal_time_cost'] = self.optimal_time_cost
        return data


def compact(instructions):
    """Merge adjacent local layers and drop identities."""
    merged = []
    for instruction in instructions:
        if isinstance(instruction, ApplyLocal):
            if merged and isinstance(merged[-1], ApplyLocal):
                instruction = ApplyLocal(merged.pop().layer.then(instruction.layer))
            if instruction.layer.is_identity():
                continue
        merged.append(instruction)
    return tuple(merged)


@dataclass(frozen=True)
class PulseSchedule:
    n_qubits: int
    cycle: tuple = ()
    repetitions: int = 1
    cost: Optional[CostReport] = None
    hardware: str = ''
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'cycle', tuple(self.cycle))
        if self.repetitions < 0:
            raise UsageError(f'repetitions must be nonnegative, got {self.repetitions}')
        for instruction in self.cycle:
            if isinstance(instruction, ApplyLocal):
                if instruction.layer.n_qubits != self.n_qubits:
                    raise SizeMismatchError(
                        f'Local layer on {instruction.layer.n_qubits} qubits in a {self.n_qubits}-qubit schedule'
                    )
            elif isinstance(instruction, RawGate):
                for q in instruction.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise SizeMismatchError(f'Gate {instruction.gate_id} targets qubit {q} outside register')
            else:
                raise UsageError(f'Unknown instruction {instruction!r}')

    @classmethod
    def empty(cls, n_qubits, cost=None, hardware=''):
        return cls(n_qubits, (), 0, cost, hardware)

    def instructions(self):
        for _ in range(self.repetitions):
            yield from self.cycle

    def __len__(self):
        return len(self.cycle) * self.repetitions

    def gates(self):
        return [i for i in self.cycle if isinstance(i, RawGate)]

    def local_layers(self):
        return [i for i in self.cycle if isinstance(i, ApplyLocal)]

    def family_angles(self):
        """Σ|θ·w| per gate family over the whole schedule."""
        totals = {}
        for gate in self.gates():
            angle = sum(abs(theta) for _, _, theta in gate.zz_angles())
            totals[gate.gate_id] = totals.get(gate.gate_id, 0.0) + angle * self.repetitions
        return totals

    def replace(self, **changes):
        values = dict(n_qubits=self.n_qubits, cycle=self.cycle, repetitions=self.repetitions,
                      cost=self.cost, hardware=self.hardware, notes=self.notes)
        values.update(changes)
        return PulseSchedule(**values)

    def as_dict(self):
        return {
            'format': FORMAT_TAG,
            'endianness': 'little',
            'n_qubits': self.n_qubits,
            'repetitions': self.repetitions,
            'hardware': self.hardware,
            'cost': self.cost.as_dict() if self.cost else None,
            'notes': list(self.notes),
            'cycle': [_instruction_dict(i) for i in self.cycle],
        }

    def to_text(self):
        lines = [
            f'# {FORMAT_TAG} endianness=little',
            f'SCHEDULE n_qubits={self.n_qubits} repetitions={self.repetitions} hardware={self.hardware}',
        ]
        if self.cost is not None:
            pairs = [f'{key}={value!r}' for key, value in self.cost.as_dict().items() if key != 'T']
            lines.append('COST ' + ' '.join(pairs))
        lines.extend(f'# {note}' for note in self.notes)
        for instruction in self.cycle:
            if isinstance(instruction, ApplyLocal):
                lines.append(_format_layer(instruction.layer))
            else:
                lines.append(_format_gate(instruction))
        return '\n'.join(lines) + '\n'


def _unitary_numbers(u):
    return [part for entry in u.entries for part in (entry.real, entry.imag)]


def _instruction_dict(instruction):
    if isinstance(instruction, ApplyLocal):
        layer = instruction.layer
        return {
            'op': 'local',
            'homogeneous': layer.is_homogeneous,
            'unitaries': [_unitary_numbers(u) for u in layer.unitaries],
        }
    return {
        'op': 'gate',
        'gate_id': instruction.gate_id,
        'theta': instruction.theta,
        'targets': [list(pair) for pair in instruction.targets],
        'weights': list(instruction.weights),
        'slot': instruction.slot,
    }


def _format_unitary(u):
    return ' '.join(repr(x) for x in _unitary_numbers(u))


def _format_layer(layer):
    if layer.is_homogeneous:
        return f'LOCAL H {_format_unitary(layer.unitaries[0])}'
    return 'LOCAL I ' + ' | '.join(_format_unitary(u) for u in layer.unitaries)


def _format_gate(gate):
    targets = ','.join(
        f'{a}-{b}' if w == 1.0 else f'{a}-{b}:{w!r}'
        for (a, b), w in zip(gate.targets, gate.weights)
    )
    return f'GATE {gate.gate_id} {gate.theta!r} {targets} slot={gate.slot}'


_COST_INTS = {'n', 'L'}


def _column(raw, token):
    return raw.find(token) + 1 if token else 1


def _float(token, raw, line_no):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f'{token!r} is not a number', line_no, _column(raw, token)) from None
    if not math.isfinite(value):
        raise ParseError(f'{token!r} is not finite', line_no, _column(raw, token))
    return value


def _key_values(tokens, raw, line_no):
    values = {}
    for token in tokens:
        key, sep, value = token.partition('=')
        if not sep:
            raise ParseError(f'expected key=value, found {token!r}', line_no, _column(raw, token))
        values[key] = value
    return values


def _parse_unitary(tokens, raw, line_no):
    if len(tokens) != 8:
        raise ParseError(f'a unitary needs 8 numbers, found {len(tokens)}', line_no,
                         _column(raw, tokens[0] if tokens else ''))
    numbers = [_float(t, raw, line_no) for t in tokens]
    try:
        return SingleQubitUnitary(tuple(complex(numbers[k], numbers[k + 1]) for k in range(0, 8, 2)))
    except UsageError as exc:
        raise ParseError(str(exc), line_no, _column(raw, tokens[0])) from None


def _parse_targets(token, raw, line_no):
    targets, weights = [], []
    for item in token.split(','):
        pair, _, weight = item.partition(':')
        a, sep, b = pair.partition('-')
        if not sep or not a.isdigit() or not b.isdigit():
            raise ParseError(f'malformed target {item!r}', line_no, _column(raw, item))
        targets.append((int(a), int(b)))
        weights.append(_float(weight, raw, line_no) if weight else 1.0)
    return tuple(targets), tuple(weights)


def parse_schedule(text):
    n_qubits = None
    repetitions = 1
    hardware = ''
    cost = None
    notes = []
    cycle = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            comment = line[1:].strip()
            if n_qubits is not None and comment:
                notes.append(comment)
            continue
        keyword, *tokens = line.split()
        if keyword == 'SCHEDULE':
            values = _key_values(tokens, raw, line_no)
            try:
                n_qubits = int(values['n_qubits'])
                repetitions = int(values.get('repetitions', 1))
            except (KeyError, ValueError):
                raise ParseError('SCHEDULE needs integer n_qubits and repetitions', line_no, 1) from None
            hardware = values.get('hardware', '')
            continue
        if n_qubits is None:
            raise ParseError(f'{keyword} before the SCHEDULE header', line_no, _column(raw, keyword))
        try:
            if keyword == 'COST':
                values = _key_values(tokens, raw, line_no)
                kwargs = {
                    key: int(value) if key in _COST_INTS else _float(value, raw, line_no)
                    for key, value in values.items() if key != 'T'
                }
                cost = CostReport(**kwargs)
            elif keyword == 'LOCAL':
                if not tokens or tokens[0] not in ('H', 'I'):
                    raise ParseError('LOCAL needs H or I', line_no, _column(raw, keyword))
                if tokens[0] == 'H':
                    layer = LocalLayer.homogeneous(_parse_unitary(tokens[1:], raw, line_no), n_qubits)
                else:
                    groups = ' '.join(tokens[1:]).split('|')
                    layer = LocalLayer.inhomogeneous(
                        _parse_unitary(group.split(), raw, line_no) for group in groups
                    )
                cycle.append(ApplyLocal(layer))
            elif keyword == 'GATE':
                if len(tokens) < 3:
                    raise ParseError('GATE needs an id, an angle and targets', line_no, _column(raw, keyword))
                gate_id, theta, target_token, *rest = tokens
                targets, weights = _parse_targets(target_token, raw, line_no)
                slot = int(_key_values(rest, raw, line_no).get('slot', 0))
                cycle.append(RawGate(gate_id, _float(theta, raw, line_no), targets, weights, slot))
            else:
                raise ParseError(f'unknown instruction {keyword!r}', line_no, _column(raw, keyword))
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), line_no, 1) from None
        except ParseError:
            raise
        except UsageError as exc:
            raise ParseError(str(exc), line_no, 1) from None
    if n_qubits is None:
        raise ParseError('missing SCHEDULE header')
    try:
        return PulseSchedule(n_qubits, tuple(cycle), repetitions, cost, hardware, tuple(notes))
    except UsageError as exc:
        raise ParseError(str(exc)) from None
