"""
First-order Trotter compilation of a target H = Σ_a H^(a) + Σ_ab H^(ab).

One cycle simulates the target for a time τ: the one-qubit part as a single
local layer, then every raw gate family wrapped in its control sequence. The
schedule repeats the cycle L = ceil(c²T′²/ε) times.
"""
import logging
from dataclasses import dataclass

from uqsim_backend.errors import InfeasibleError, UsageError
from .feasibility import homogeneous_feasibility, pauli_frame_sequence, synthesize_diagonal
from .schedule import ApplyLocal, CostReport, PulseSchedule, RawGate, compact
from .sequences import local_evolution_layer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FamilyPlan:
    family: object
    synthesis: object

    @property
    def time_cost(self):
        return self.synthesis.time_cost

    def instructions(self, tau):
        """V_i†, gate, V_i for every step; the gate angle is γ·p_i·c·τ."""
        out = []
        for p, layer in self.synthesis.sequence.steps:
            theta = self.family.gamma * p * self.time_cost * tau
            out.append(ApplyLocal(layer.dagger()))
            out.append(RawGate(self.family.gate_id, theta, self.family.targets, self.family.weights))
            out.append(ApplyLocal(layer))
        return out


@dataclass(frozen=True)
class CyclePlan:
    n_qubits: int
    local: object
    families: tuple

    @property
    def time_cost(self):
        return sum(plan.time_cost for plan in self.families)

    @property
    def optimal_time_cost(self):
        return sum(plan.synthesis.optimal_time_cost for plan in self.families)

    @property
    def n_steps(self):
        return sum(plan.synthesis.sequence.n for plan in self.families)

    def instructions(self, tau):
        out = []
        if not self.local.is_zero():
            out.append(ApplyLocal(local_evolution_layer(self.local, tau)))
        for plan in self.families:
            out.extend(plan.instructions(tau))
        return compact(out)


def _synthesize(family, hw, n_qubits):
    m = family.matrix
    if family.isolate:
        frames = hw.isolation_frames(family.pair)
        synthesis = pauli_frame_sequence(m, family.coupling, family.pair, n_qubits)
        return type(synthesis)(synthesis.sequence.framed(frames), synthesis.time_cost,
                               synthesis.optimal_time_cost, synthesis.weights)
    homogeneous_only = not hw.allows_inhomogeneous
    if homogeneous_only or family.pair is None:
        result = homogeneous_feasibility(m, family.coupling)
        if not result.feasible:
            raise InfeasibleError(f'{family.gate_id}: {result.reason}')
        if not m.is_diagonal():
            raise InfeasibleError(
                f'{family.gate_id}: no homogeneous sequence is synthesised for a non-diagonal '
                'coefficient matrix'
            )
        return synthesize_diagonal(m, family.coupling, n_qubits)
    if m.is_diagonal() and homogeneous_feasibility(m, family.coupling).feasible:
        return synthesize_diagonal(m, family.coupling, n_qubits)
    return pauli_frame_sequence(m, family.coupling, family.pair, n_qubits)


def plan_cycle(target, hw):
    if target.n_qubits != hw.n_qubits:
        raise UsageError(f'Target acts on {target.n_qubits} qubits, hardware has {hw.n_qubits}')
    if target.max_weight() > 2:
        raise UsageError('Trotter compilation needs one- and two-qubit terms only')
    local = target.local_part()
    hw.check_local(local)
    families = sorted(hw.families(target.two_body_part()), key=lambda f: f.sort_key)
    plans = tuple(FamilyPlan(f, _synthesize(f, hw, target.n_qubits)) for f in families)
    return CyclePlan(target.n_qubits, local, plans)


def trotter_cycle(target, tau, hw):
    """Instructions simulating ``target`` for time ``tau`` once."""
    return plan_cycle(target, hw).instructions(tau)


def trotter_schedule(target, T_prime, epsilon, hw, repetitions=None):
    """Compile ``target`` for simulated time T′ within error budget ε.

    ``repetitions`` overrides L, e.g. to study convergence at fixed T′.
    """
    plan = plan_cycle(target, hw)
    cost = CostReport.from_budget(plan.time_cost, plan.n_steps, T_prime, epsilon,
                                  plan.optimal_time_cost, repetitions)
    reps = cost.L
    if reps == 0 and not plan.local.is_zero() and T_prime > 0:
        reps = 1
    if reps == 0:
        schedule = PulseSchedule.empty(target.n_qubits, cost, hw.name)
    else:
        schedule = PulseSchedule(target.n_qubits, plan.instructions(T_prime / reps), reps, cost, hw.name)
    logger.info('Compiled %d-qubit target on %s: c=%.6g n=%d L=%d (%d instructions per cycle)',
                target.n_qubits, hw.name, cost.time_cost, cost.n, cost.L, len(schedule.cycle))
    return schedule
