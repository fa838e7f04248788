"""
Run pulse schedules on statevectors.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from avg_compiler.schedule import ApplyLocal, RawGate
from uqsim_backend.errors import NumericFailure, ParseError
from .noise import RNG_ALGORITHM, ErrorModel, as_stream
from .state import NORM_TOL, StateVector, apply_local_layer, zz_phase_exponent

logger = logging.getLogger(__name__)

LOG_TAG = 'uqs-execlog/1'


@dataclass
class ExecutionLog:
    rng_algorithm: str = RNG_ALGORITHM
    seed: Optional[int] = None
    eta_local: float = 0.0
    eta_int: float = 0.0
    distribution: str = 'uniform'
    instructions: int = 0
    draws: list = field(default_factory=list)

    def to_text(self):
        lines = [
            f'# {LOG_TAG}',
            f'rng={self.rng_algorithm} seed={self.seed} eta_local={self.eta_local!r} '
            f'eta_int={self.eta_int!r} distribution={self.distribution} instructions={self.instructions}',
        ]
        for index, channel, values in self.draws:
            lines.append(f'{index} {channel} ' + ' '.join(repr(v) for v in values))
        return '\n'.join(lines) + '\n'

    def as_dict(self):
        return {
            'rng_algorithm': self.rng_algorithm,
            'seed': self.seed,
            'eta_local': self.eta_local,
            'eta_int': self.eta_int,
            'distribution': self.distribution,
            'instructions': self.instructions,
            'draws': [{'instruction': i, 'channel': c, 'deltas': list(v)} for i, c, v in self.draws],
        }


def parse_execution_log(text):
    log = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if log is None:
            values = dict(token.partition('=')[::2] for token in line.split())
            try:
                seed = None if values.get('seed') in (None, 'None') else int(values['seed'])
                log = ExecutionLog(values.get('rng', RNG_ALGORITHM), seed,
                                   float(values.get('eta_local', 0)), float(values.get('eta_int', 0)),
                                   values.get('distribution', 'uniform'), int(values.get('instructions', 0)))
            except ValueError:
                raise ParseError('malformed execution log header', line_no, 1) from None
            continue
        index, channel, *numbers = line.split()
        try:
            log.draws.append((int(index), channel, tuple(float(v) for v in numbers)))
        except ValueError:
            raise ParseError('malformed draw line', line_no, 1) from None
    if log is None:
        raise ParseError('execution log lacks a header')
    return log


def run_schedule(state, schedule, err=None, replay=None):
    """Apply ``schedule`` in time order and return (final state, execution log).

    With ``replay`` the logged δ values are applied instead of fresh draws.
    Consecutive raw gates are combined into one diagonal phase.
    """
    if state.n_qubits != schedule.n_qubits:
        raise NumericFailure(f'Schedule for {schedule.n_qubits} qubits run on a {state.n_qubits}-qubit state')
    if replay is not None:
        model = ErrorModel(replay.eta_local, replay.eta_int, replay.seed, replay.distribution)
        stream = model.stream(replay)
    else:
        # err may be an ErrorModel or a stream shared across several runs
        model = getattr(err, 'model', err) or ErrorModel()
        stream = as_stream(err)
    n = state.n_qubits
    amplitudes = state.amplitudes.copy()
    exponent = None
    count = 0

    def flush():
        nonlocal amplitudes, exponent
        if exponent is not None:
            amplitudes = amplitudes * np.exp(-1j * exponent)
            exponent = None
            _check_norm(amplitudes, count)

    for instruction in schedule.instructions():
        if isinstance(instruction, RawGate):
            gates = instruction.zz_angles()
            deltas = stream.draw('int', 1) if stream else None
            if deltas is not None:
                gates = [(a, b, theta * (1.0 + deltas[0])) for a, b, theta in gates]
            phase = zz_phase_exponent(n, gates)
            exponent = phase if exponent is None else exponent + phase
        elif isinstance(instruction, ApplyLocal):
            flush()
            amplitudes = apply_local_layer(StateVector(amplitudes, check_norm=False), instruction.layer,
                                           stream).amplitudes
            _check_norm(amplitudes, count)
        if stream:
            stream.advance()
        count += 1
    flush()
    log = ExecutionLog(RNG_ALGORITHM, model.seed, model.eta_local, model.eta_int, model.distribution,
                       count, list(stream.records) if stream else [])
    logger.debug('Ran %d instructions with %d noise draws', count, len(log.draws))
    return StateVector(amplitudes, check_norm=False), log


def _check_norm(amplitudes, count):
    deviation = abs(float(np.linalg.norm(amplitudes)) - 1.0)
    if deviation > NORM_TOL:
        raise NumericFailure(f'State norm drifted by {deviation:.3e} after {count} instructions')
