"""
Adiabatic ground-state preparation along H(k) = k·H⁰ + (1 - k)·H with k
ramped from 1 to 0, one compiled Trotter cycle per step.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from avg_compiler.schedule import PulseSchedule, RawGate
from avg_compiler.trotter import plan_cycle
from sv_engine.executor import ExecutionLog, run_schedule
from sv_engine.noise import RNG_ALGORITHM, ErrorModel
from sv_engine.oracle import SpectrumCache, check_dense_cap, eigenspace_histogram, exact_evolve, ground_state
from sv_engine.state import energy, subspace_fidelity
from uqsim_backend.errors import NumericFailure, SizeMismatchError, UsageError

logger = logging.getLogger(__name__)

RAMPS = {
    'linear': lambda x: 1.0 - x,
    'cosine': lambda x: 0.5 * (1.0 + math.cos(math.pi * x)),
}

STEPPING_MODES = ('trotter', 'exact')


def interpolate(h_initial, h_target, k):
    k = float(k)
    return h_initial * k + h_target * (1.0 - k)


@dataclass(frozen=True)
class AdiabaticConfig:
    h_initial: object
    h_target: object
    steps: int
    theta1: float
    ramp: str = 'linear'
    error_model: ErrorModel = field(default_factory=ErrorModel)
    record_every: int = 1
    stepping: str = 'trotter'

    def __post_init__(self):
        if self.h_initial.n_qubits != self.h_target.n_qubits:
            raise SizeMismatchError(
                f'Initial Hamiltonian acts on {self.h_initial.n_qubits} qubits, target on {self.h_target.n_qubits}'
            )
        if self.steps < 1:
            raise UsageError(f'steps must be positive, got {self.steps}')
        if not self.theta1 > 0:
            raise UsageError(f'theta1 must be positive, got {self.theta1}')
        if self.ramp not in RAMPS:
            raise UsageError(f'Unknown ramp {self.ramp!r}; expected one of {sorted(RAMPS)}')
        if self.stepping not in STEPPING_MODES:
            raise UsageError(f'Unknown stepping {self.stepping!r}; expected one of {STEPPING_MODES}')
        if self.record_every < 1:
            raise UsageError('record_every must be positive')
        if self.stepping == 'exact' and self.error_model.is_active:
            raise UsageError('Timing errors apply to compiled pulses; use trotter stepping')

    @property
    def n_qubits(self):
        return self.h_initial.n_qubits

    def k(self, step):
        return RAMPS[self.ramp](step / self.steps)

    def recorded(self, step):
        return step % self.record_every == 0 or step == self.steps


@dataclass(frozen=True)
class GapReport:
    min_gap: float
    k_at_min: float
    recommended_time: float
    ks: tuple
    gaps: tuple


def min_gap(h_initial, h_target, samples=101):
    """Smallest E₁ - E₀ of H(k) on a uniform grid of ``samples`` points in [0, 1]."""
    if h_initial.n_qubits != h_target.n_qubits:
        raise SizeMismatchError('Initial and target Hamiltonians act on different registers')
    if samples < 2:
        raise UsageError('Need at least two samples along the path')
    check_dense_cap(h_initial.n_qubits)
    ks = np.linspace(0.0, 1.0, samples)
    gaps = tuple(SpectrumCache.from_hamiltonian(interpolate(h_initial, h_target, k)).gap() for k in ks)
    finite = [(g, k) for g, k in zip(gaps, ks) if g is not None]
    if not finite:
        raise NumericFailure('gapless path: every sampled H(k) has a single eigenvalue group')
    gap, k_min = min(finite, key=lambda item: item[0])
    logger.info('Minimum gap %.6g at k=%.4g over %d samples', gap, k_min, samples)
    return GapReport(float(gap), float(k_min), 1.0 / gap, tuple(float(k) for k in ks), gaps)


@dataclass(frozen=True)
class PathStep:
    step: int
    k: float
    hamiltonian: object
    dt: float
    cycle: tuple = ()
    ground_basis: Optional[np.ndarray] = None


def _dominant_rate(h, plan):
    """Largest rotation angle per unit time: raw ZZ angles when compiled, else |coefficients|."""
    strongest_field = max((abs(t.coeff) for t in h.local_part().terms), default=0.0)
    if plan is None:
        return max((abs(t.coeff) for t in h.terms), default=0.0)
    gates = [i for i in plan.instructions(1.0) if isinstance(i, RawGate)]
    return max([strongest_field] + [abs(angle) for gate in gates for _, _, angle in gate.zz_angles()])


def prepare_path(config, hw=None):
    """Compiled cycles and instantaneous ground spaces of every step, shared by all seeds."""
    if config.stepping == 'trotter' and hw is None:
        raise UsageError('Trotter stepping needs a hardware model')
    if hw is not None and hw.n_qubits != config.n_qubits:
        raise SizeMismatchError(f'Hardware has {hw.n_qubits} qubits, the path {config.n_qubits}')
    check_dense_cap(config.n_qubits)
    path = []
    for s in range(1, config.steps + 1):
        k = config.k(s)
        h = interpolate(config.h_initial, config.h_target, k)
        plan = plan_cycle(h, hw) if hw is not None else None
        rate = _dominant_rate(h, plan)
        if rate == 0:
            raise UsageError(f'H(k={k:.4g}) has no terms to set the step length from')
        dt = config.theta1 / rate
        cycle = plan.instructions(dt) if config.stepping == 'trotter' else ()
        basis = ground_state(h).basis if config.recorded(s) else None
        path.append(PathStep(s, k, h, dt, tuple(cycle), basis))
    logger.info('Prepared %d adiabatic steps on %d qubits (%s stepping)',
                config.steps, config.n_qubits, config.stepping)
    return tuple(path)


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    k: float
    fidelity: float
    energy: float


@dataclass(frozen=True)
class AdiabaticResult:
    trajectory: tuple
    histogram: tuple
    final_fidelity: float
    total_time: float
    log: ExecutionLog


def adiabatic_run(config, hw=None, path=None, target_spectrum=None):
    n = config.n_qubits
    path = path or prepare_path(config, hw)
    state = ground_state(config.h_initial).state
    model = config.error_model
    stream = model.stream() if model.is_active else None
    trajectory = []
    for point in path:
        if config.stepping == 'trotter':
            state, _ = run_schedule(state, PulseSchedule(n, point.cycle, 1), stream)
        else:
            state = exact_evolve(point.hamiltonian, point.dt, state)
        if point.ground_basis is not None:
            trajectory.append(TrajectoryPoint(point.step, point.k, subspace_fidelity(state, point.ground_basis),
                                              energy(state, point.hamiltonian)))
    target_spectrum = target_spectrum or SpectrumCache.from_hamiltonian(config.h_target)
    histogram = tuple(eigenspace_histogram(state, config.h_target, cache=target_spectrum))
    final = trajectory[-1].fidelity
    log = ExecutionLog(RNG_ALGORITHM, model.seed, model.eta_local, model.eta_int, model.distribution,
                       stream.instruction if stream else sum(len(p.cycle) for p in path),
                       list(stream.records) if stream else [])
    logger.info('Adiabatic run over %d steps: final ground-space weight %.6f', config.steps, final)
    return AdiabaticResult(tuple(trajectory), histogram, final, math.fsum(p.dt for p in path), log)


@dataclass(frozen=True)
class SweepRow:
    eta: float
    steps: int
    mean: float
    std: float
    sem: float
    n: int

    def as_dict(self):
        return {'eta': self.eta, 'steps': self.steps, 'mean_fidelity': self.mean,
                'std': self.std, 'sem': self.sem, 'repetitions': self.n}


def run_seed(seed, i, j, r):
    """Independent 64-bit seed of repetition r at grid point (i, j)."""
    return int(np.random.SeedSequence(seed, spawn_key=(i, j, r)).generate_state(1, np.uint64)[0])


def error_sweep(config, hw, eta_list, steps_list, repetitions=20, seed=0, jobs=1):
    """Mean final ground-space weight for every (η, steps) pair; η applies to both channels."""
    if repetitions < 1:
        raise UsageError('repetitions must be positive')
    if not eta_list or not steps_list:
        raise UsageError('Sweep needs at least one error level and one step count')
    target_spectrum = SpectrumCache.from_hamiltonian(config.h_target)
    rows = []
    for j, steps in enumerate(steps_list):
        base = replace(config, steps=int(steps), error_model=ErrorModel(), record_every=int(steps))
        path = prepare_path(base, hw)
        for i, eta in enumerate(eta_list):
            if eta == 0:
                runs = [replace(base, error_model=ErrorModel())]
            else:
                runs = [
                    replace(base, error_model=ErrorModel(eta, eta, run_seed(seed, i, j, r),
                                                         config.error_model.distribution))
                    for r in range(repetitions)
                ]

            def final(run_config):
                return adiabatic_run(run_config, hw, path, target_spectrum).final_fidelity

            if jobs > 1 and len(runs) > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    values = np.array(list(pool.map(final, runs)))
            else:
                values = np.array([final(run) for run in runs])
            std = float(values.std(ddof=1)) if values.size > 1 else 0.0
            rows.append(SweepRow(float(eta), int(steps), float(values.mean()), std,
                                 std / math.sqrt(values.size), int(values.size)))
            logger.info('Sweep eta=%g steps=%d: mean %.6f ± %.2g over %d runs',
                        eta, steps, rows[-1].mean, rows[-1].sem, values.size)
    return rows
