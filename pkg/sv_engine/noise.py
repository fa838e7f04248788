"""
Timing errors: every intended rotation angle or interaction time is
multiplied by (1 + δ), δ drawn independently per qubit (local pulses) or per
gate (interactions).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from uqsim_backend.errors import ConfigPolicyError, UsageError

logger = logging.getLogger(__name__)

RNG_ALGORITHM = 'PCG64DXSM'

DISTRIBUTIONS = {
    'uniform': lambda rng, eta, size: rng.uniform(-eta, eta, size),
    'normal': lambda rng, eta, size: rng.normal(0.0, eta, size),
}

CHANNELS = ('local', 'int')


@dataclass(frozen=True)
class ErrorModel:
    eta_local: float = 0.0
    eta_int: float = 0.0
    seed: Optional[int] = None
    distribution: str = 'uniform'

    def __post_init__(self):
        for name in ('eta_local', 'eta_int'):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise UsageError(f'{name} must lie in [0, 1), got {value}')
        if self.distribution not in DISTRIBUTIONS:
            raise UsageError(f'Unknown error distribution {self.distribution!r}; expected one of {sorted(DISTRIBUTIONS)}')
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise UsageError('Seed must be a 64-bit unsigned integer')

    @property
    def is_active(self):
        return self.eta_local > 0 or self.eta_int > 0

    def eta(self, channel):
        return self.eta_local if channel == 'local' else self.eta_int

    def with_seed(self, seed):
        return ErrorModel(self.eta_local, self.eta_int, seed, self.distribution)

    def stream(self, replay=None):
        return TimingNoise(self, replay)


class TimingNoise:
    """Sequential δ draws for one run; every draw is kept so the run can be replayed.

    A channel with η = 0 draws nothing, so the zero-error run is identical to
    a run without an error model.
    """

    def __init__(self, model, replay=None):
        if model.is_active and model.seed is None and replay is None:
            raise ConfigPolicyError('An error model needs an explicit seed for a reproducible run')
        self.model = model
        self.generator = np.random.Generator(np.random.PCG64DXSM(model.seed)) if model.seed is not None else None
        self.records = []
        self.instruction = 0
        self._replay = list(replay.draws) if replay is not None else None

    def draw(self, channel, size):
        eta = self.model.eta(channel)
        if eta == 0:
            return None
        if self._replay is not None:
            if not self._replay:
                raise UsageError('Replay log ran out of draws before the schedule ended')
            index, logged_channel, values = self._replay.pop(0)
            if (index, logged_channel, len(values)) != (self.instruction, channel, size):
                raise UsageError(
                    f'Replay log entry ({index}, {logged_channel}, {len(values)} draws) does not match '
                    f'instruction {self.instruction} ({channel}, {size} draws)'
                )
            deltas = np.array(values, dtype=float)
        else:
            deltas = DISTRIBUTIONS[self.model.distribution](self.generator, eta, size)
        self.records.append((self.instruction, channel, tuple(float(d) for d in deltas)))
        return deltas

    def advance(self):
        self.instruction += 1


def as_stream(err):
    if err is None:
        return None
    if isinstance(err, ErrorModel):
        return err.stream() if err.is_active else None
    return err
