import math

import numpy as np
from django.test import SimpleTestCase
from scipy import linalg

from hardware.lattice import LatticeModel
from hardware.traps import TrapArrayModel
from pauli_core.coeff import CoeffMatrix, coeff_matrix, from_coeff_matrix
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from sv_engine.oracle import dense_unitary, exact_unitary, operator_distance
from uqsim_backend.errors import (
    HardwareConstraintError, InfeasibleError, ParseError, UsageError,
)
from .composite import decoupling_echo, three_body_gate
from .feasibility import (
    homogeneous_feasibility, inhomogeneous_cost, pauli_frame_sequence, synthesize_diagonal,
)
from .schedule import ApplyLocal, CostReport, RawGate, parse_schedule
from .sequences import (
    ControlSequence, check_protocol, effective_hamiltonian, magnetic_field_layer, protocol_library,
)
from .trotter import trotter_schedule


def H(n, *terms):
    return Hamiltonian.from_terms(n, terms)


def heisenberg_chain(n, j):
    terms = []
    for a in range(n - 1):
        for op in 'XYZ':
            ops = ['I'] * n
            ops[a] = ops[a + 1] = op
            terms.append((j, ''.join(ops)))
    return Hamiltonian.from_terms(n, terms)


def random_unitary(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return SingleQubitUnitary.from_matrix(q * (np.diag(r) / np.abs(np.diag(r))))


def random_chain_target(rng, n):
    """Nearest-neighbour couplings plus weak fields."""
    terms = []
    for a in range(n - 1):
        for left in 'XYZ':
            for right in 'XYZ':
                ops = ['I'] * n
                ops[a], ops[a + 1] = left, right
                terms.append((rng.uniform(-1, 1), ''.join(ops)))
    for a in range(n):
        for op in 'XYZ':
            ops = ['I'] * n
            ops[a] = op
            terms.append((rng.uniform(-0.3, 0.3), ''.join(ops)))
    return Hamiltonian.from_terms(n, terms)


def sequence_gate(seq, h0, t):
    """Π_i V_i exp(-i p_i t h0) V_i† in time order."""
    u = np.eye(2 ** h0.n_qubits, dtype=complex)
    for p, layer in seq.steps:
        v = layer.to_matrix()
        u = v @ linalg.expm(-1j * p * t * h0.to_matrix()) @ v.conj().T @ u
    return u


class EffectiveHamiltonianTests(SimpleTestCase):
    def test_identity_step(self):
        h0 = H(2, (0.7, 'ZZ'))
        self.assertTrue(effective_hamiltonian(protocol_library('identity'), h0).isclose(h0))

    def test_heisenberg3_on_zz(self):
        gamma = 0.9
        result = effective_hamiltonian(protocol_library('heisenberg3'), H(2, (gamma, 'ZZ')))
        self.assertTrue(result.isclose(H(2, (gamma / 3, 'XX'), (gamma / 3, 'YY'), (gamma / 3, 'ZZ'))))

    def test_xy2_on_dipolar_zz(self):
        n = 3
        pairs = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1 / 8)]
        h0 = Hamiltonian.from_terms(n, [
            (w, ''.join('Z' if q in (a, b) else 'I' for q in range(n))) for a, b, w in pairs
        ])
        expected = Hamiltonian.from_terms(n, [
            (w / 2, ''.join(op if q in (a, b) else 'I' for q in range(n)))
            for a, b, w in pairs for op in 'XY'
        ])
        self.assertTrue(effective_hamiltonian(protocol_library('xy2', n), h0).isclose(expected))

    def test_linear_in_h0(self):
        seq = protocol_library('heisenberg3')
        h1, h2 = H(2, (0.3, 'ZZ'), (0.1, 'XI')), H(2, (-0.8, 'XY'))
        combined = effective_hamiltonian(seq, 2.0 * h1 + h2)
        separate = 2.0 * effective_hamiltonian(seq, h1) + effective_hamiltonian(seq, h2)
        self.assertTrue(combined.isclose(separate))

    def test_weights_must_sum_to_one(self):
        with self.assertRaises(UsageError):
            ControlSequence(((0.5, LocalLayer.identity(2)), (0.3, LocalLayer.identity(2))))

    def test_homogeneous_sequences_give_symmetric_positive_matrices(self):
        rng = np.random.default_rng(17)
        for gamma in (1.0, -0.6):
            for _ in range(10):
                weights = rng.uniform(0.1, 1.0, size=4)
                layers = [LocalLayer.homogeneous(random_unitary(rng), 2) for _ in weights]
                seq = ControlSequence.from_weights(weights, layers)
                m = coeff_matrix(effective_hamiltonian(seq, H(2, (gamma, 'ZZ'))))
                self.assertTrue(m.is_symmetric(1e-10))
                eigenvalues = np.linalg.eigvalsh(np.sign(gamma) * m.matrix)
                self.assertGreaterEqual(eigenvalues.min(), -1e-10)


class ProtocolLibraryTests(SimpleTestCase):
    def test_identity_has_one_step(self):
        seq = protocol_library('identity')
        self.assertEqual(seq.n, 1)
        self.assertTrue(seq.layers[0].is_identity())

    def test_antisym2(self):
        gamma = 1.4
        result = effective_hamiltonian(protocol_library('antisym2'), H(2, (gamma, 'ZZ')))
        self.assertTrue(result.isclose(H(2, (gamma / 2, 'ZY'), (-gamma / 2, 'YZ'))))

    def test_check_protocol_scale_and_sign(self):
        target = H(2, (1.0, 'ZY'), (-1.0, 'YZ'))
        check = check_protocol('antisym2', target, H(2, (1.0, 'ZZ')))
        self.assertTrue(check.matches)
        self.assertTrue(check.sign_consistent)
        self.assertAlmostEqual(check.scale, 2.0)
        flipped = check_protocol('antisym2', target, H(2, (-1.0, 'ZZ')))
        self.assertTrue(flipped.matches)
        self.assertFalse(flipped.sign_consistent)

    def test_unknown_name(self):
        with self.assertRaises(UsageError):
            protocol_library('wahuha')


class FeasibilityTests(SimpleTestCase):
    def test_heisenberg_cost(self):
        j, gamma = 0.8, 0.5
        result = homogeneous_feasibility(CoeffMatrix.diagonal(j, j, j), gamma)
        self.assertTrue(result.feasible)
        self.assertAlmostEqual(result.time_cost, 3 * j / gamma, places=12)

    def test_sign_mismatch_infeasible(self):
        result = homogeneous_feasibility(CoeffMatrix.diagonal(1, 1, 1), -1.0)
        self.assertFalse(result.feasible)
        self.assertIsNone(result.time_cost)
        self.assertIn('sign', result.reason)

    def test_zero_target(self):
        result = homogeneous_feasibility(CoeffMatrix.diagonal(0, 0, 0), 2.0)
        self.assertTrue(result.feasible)
        self.assertEqual(result.time_cost, 0.0)

    def test_asymmetric_rejected(self):
        m = coeff_matrix(H(2, (1.0, 'ZY'), (-1.0, 'YZ')))
        with self.assertRaises(InfeasibleError):
            homogeneous_feasibility(m, 1.0)

    def test_inhomogeneous_cost_examples(self):
        j, gamma = 0.7, -1.3
        m = coeff_matrix(H(2, (j, 'ZY'), (-j, 'YZ')))
        self.assertAlmostEqual(inhomogeneous_cost(m, gamma), 2 * abs(j) / abs(gamma), places=12)
        self.assertAlmostEqual(inhomogeneous_cost(CoeffMatrix.diagonal(0, 0, gamma), gamma), 1.0, places=12)

    def test_inhomogeneous_cost_matches_eigen_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            matrix = rng.normal(size=(3, 3))
            oracle = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(matrix.T @ matrix), 0, None)))
            self.assertAlmostEqual(inhomogeneous_cost(CoeffMatrix.from_array(matrix), 1.0), oracle, places=9)


class SynthesisTests(SimpleTestCase):
    def test_heisenberg_weights(self):
        j = 1.2
        result = synthesize_diagonal(CoeffMatrix.diagonal(j, j, j), j)
        for p in result.sequence.weights:
            self.assertAlmostEqual(p, 1 / 3)
        self.assertAlmostEqual(result.time_cost, 3.0)

    def test_self_simulation_is_identity(self):
        gamma = 0.4
        result = synthesize_diagonal(CoeffMatrix.diagonal(0, 0, gamma), gamma)
        self.assertEqual(result.sequence.n, 1)
        self.assertTrue(result.sequence.layers[0].is_identity())
        self.assertAlmostEqual(result.time_cost, 1.0)

    def test_two_to_one(self):
        gamma = 0.5
        target = CoeffMatrix.diagonal(2 * gamma, gamma, 0)
        result = synthesize_diagonal(target, gamma)
        self.assertAlmostEqual(result.time_cost, 3.0)
        np.testing.assert_allclose(result.weights, (2 / 3, 1 / 3, 0.0))
        produced = effective_hamiltonian(result.sequence, H(2, (gamma, 'ZZ'))) * result.time_cost
        self.assertTrue(produced.isclose(from_coeff_matrix(target)))

    def test_infeasible_target(self):
        with self.assertRaises(InfeasibleError):
            synthesize_diagonal(CoeffMatrix.diagonal(1, -1, 0), 1.0)

    def test_pauli_frames_reproduce_any_matrix(self):
        rng = np.random.default_rng(9)
        for gamma in (1.0, -0.5):
            matrix = rng.normal(size=(3, 3))
            result = pauli_frame_sequence(CoeffMatrix.from_array(matrix), gamma)
            produced = effective_hamiltonian(result.sequence, H(2, (gamma, 'ZZ'))) * result.time_cost
            self.assertTrue(produced.isclose(from_coeff_matrix(matrix), 1e-12))
            self.assertAlmostEqual(result.time_cost, np.abs(matrix).sum() / abs(gamma))
            self.assertGreaterEqual(result.time_cost, result.optimal_time_cost - 1e-12)


class MagneticFieldTests(SimpleTestCase):
    def test_zero_field(self):
        self.assertTrue(magnetic_field_layer(0.0, (0, 0, 1), 0.3, n_qubits=3).is_identity())

    def test_z_half_turn(self):
        layer = magnetic_field_layer(1.0, (0, 0, 1), math.pi / 2, n_qubits=2)
        np.testing.assert_allclose(layer.unitary(0).matrix, np.diag([-1j, 1j]), atol=1e-15)

    def test_x_quarter_turn(self):
        layer = magnetic_field_layer(2.0, (1, 0, 0), math.pi / 8, n_qubits=1)
        expected = (np.eye(2) - 1j * np.array([[0, 1], [1, 0]])) / math.sqrt(2)
        np.testing.assert_allclose(layer.unitary(0).matrix, expected, atol=1e-15)

    def test_per_qubit_fields(self):
        layer = magnetic_field_layer([0.0, 1.0], (0, 0, 1), 0.5)
        self.assertFalse(layer.is_homogeneous)
        self.assertTrue(layer.unitary(0).is_identity())

    def test_non_unit_direction(self):
        with self.assertRaises(UsageError):
            magnetic_field_layer(1.0, (1, 1, 0), 0.1, n_qubits=2)


class CostReportTests(SimpleTestCase):
    def test_self_simulation_budget(self):
        cost = CostReport.from_budget(1.0, 1, 1.0, 0.01)
        self.assertEqual(cost.L, 100)
        self.assertAlmostEqual(cost.step_t, 0.01)

    def test_invariants(self):
        for c, n, t_prime, eps in ((3.0, 3, 1.0, 0.01), (1.7, 9, 0.4, 0.003), (0.25, 2, 2.0, 0.1)):
            cost = CostReport.from_budget(c, n, t_prime, eps)
            self.assertEqual(cost.L, math.ceil(round(c * c * t_prime * t_prime / eps, 9)))
            self.assertAlmostEqual(cost.L * cost.step_t, c * t_prime)
            self.assertAlmostEqual(cost.chi * cost.T, n * cost.L)

    def test_zero_cost(self):
        cost = CostReport.from_budget(0.0, 0, 1.0, 0.01)
        self.assertEqual((cost.L, cost.step_t, cost.chi), (0, 0.0, 0.0))


class TrotterScheduleTests(SimpleTestCase):
    def test_zz_self_simulation(self):
        gamma = 0.6
        schedule = trotter_schedule(H(2, (gamma, 'ZZ')), 1.0, 0.01, TrapArrayModel.chain(2, gamma=gamma))
        self.assertEqual(schedule.cost.L, 100)
        self.assertAlmostEqual(schedule.cost.step_t, 0.01)
        self.assertEqual(len(schedule.gates()), 1)
        self.assertAlmostEqual(schedule.gates()[0].theta, gamma * 0.01)

    def test_heisenberg_chain_on_lattice(self):
        j = 0.5
        schedule = trotter_schedule(heisenberg_chain(4, j), 1.0, 0.01, LatticeModel.chain(4))
        cost = schedule.cost
        self.assertAlmostEqual(cost.time_cost, 3 * j)
        self.assertEqual(cost.n, 3)
        self.assertAlmostEqual(cost.chi, 9 * j * 1.0 / (1.0 * 0.01))
        self.assertEqual(len(schedule.local_layers()), 3)
        self.assertEqual({g.gate_id for g in schedule.gates()}, {'K1'})
        self.assertTrue(all(layer.layer.uniform() for layer in schedule.local_layers()))

    def test_sign_condition(self):
        with self.assertRaises(InfeasibleError) as ctx:
            trotter_schedule(heisenberg_chain(3, 1.0), 1.0, 0.01, LatticeModel.chain(3, gamma=-1.0))
        self.assertIn('sign', str(ctx.exception))
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_empty_target(self):
        schedule = trotter_schedule(Hamiltonian.zero(3), 1.0, 0.01, LatticeModel.chain(3))
        self.assertEqual(len(schedule), 0)
        self.assertEqual(schedule.cost.time_cost, 0.0)

    def test_random_couplings_need_addressability(self):
        target = H(3, (1.0, 'ZZI'), (0.4, 'IZZ'))
        with self.assertRaises(HardwareConstraintError) as ctx:
            trotter_schedule(target, 1.0, 0.01, LatticeModel.chain(3))
        self.assertIn('addressability', str(ctx.exception))

    def test_text_round_trip(self):
        schedule = trotter_schedule(heisenberg_chain(3, 1.0) + H(3, (0.2, 'XII'), (0.2, 'IXI'), (0.2, 'IIX')),
                                    0.3, 0.05, LatticeModel.chain(3))
        self.assertEqual(parse_schedule(schedule.to_text()), schedule)

    def test_parse_errors(self):
        text = '# uqs-schedule/1\nSCHEDULE n_qubits=2 repetitions=1 hardware=\nGATE K1 abc 0-1\n'
        with self.assertRaises(ParseError) as ctx:
            parse_schedule(text)
        self.assertEqual(ctx.exception.line, 3)
        with self.assertRaises(ParseError):
            parse_schedule('GATE K1 0.1 0-1\n')

    def test_oracle_within_twice_budget(self):
        rng = np.random.default_rng(4)
        eps = 0.01
        target = random_chain_target(rng, 3)
        t_prime = 0.3
        schedule = trotter_schedule(target, t_prime, eps, TrapArrayModel.chain(3))
        error = operator_distance(dense_unitary(schedule), exact_unitary(target, t_prime))
        self.assertLessEqual(error, 2 * eps)

    def test_first_order_convergence(self):
        rng = np.random.default_rng(8)
        target = random_chain_target(rng, 3)
        hw = TrapArrayModel.chain(3)
        exact = exact_unitary(target, 0.5)
        errors = [
            operator_distance(dense_unitary(trotter_schedule(target, 0.5, 0.01, hw, repetitions=L)), exact)
            for L in (200, 400)
        ]
        self.assertTrue(1.8 <= errors[0] / errors[1] <= 2.2, errors)

    def test_addressable_lattice_isolates_bonds(self):
        target = H(3, (0.9, 'ZZI'), (-0.4, 'IZZ'), (0.3, 'XII'))
        hw = LatticeModel.chain(3, addressable=True)
        schedule = trotter_schedule(target, 0.5, 0.01, hw, repetitions=2000)
        self.assertLess(operator_distance(dense_unitary(schedule), exact_unitary(target, 0.5)), 1e-2)


class ShortGateTests(SimpleTestCase):
    def test_error_is_second_order(self):
        rng = np.random.default_rng(21)
        matrix = rng.uniform(-1, 1, size=(3, 3))
        seq = pauli_frame_sequence(CoeffMatrix.from_array(matrix), 1.0).sequence
        h0 = H(2, (1.0, 'ZZ'))
        effective = effective_hamiltonian(seq, h0).to_matrix()
        errors = [
            operator_distance(sequence_gate(seq, h0, t), linalg.expm(-1j * t * effective))
            for t in (0.02, 0.01)
        ]
        self.assertTrue(3.5 <= errors[0] / errors[1] <= 4.5, errors)


class ThreeBodyGateTests(SimpleTestCase):
    h1 = H(3, (1.0, 'IZZ'))
    h2 = H(3, (1.0, 'XXI'))

    def test_generator(self):
        gate = three_body_gate(self.h1, self.h2, 0.1)
        self.assertTrue(gate.generator.isclose(H(3, (2.0, 'XYZ')), 1e-12))
        self.assertAlmostEqual(gate.effective_time, 0.01)
        self.assertEqual(len(gate.steps), 4)

    def test_commuting_generators_cancel(self):
        gate = three_body_gate(self.h1, self.h1, 0.3)
        np.testing.assert_allclose(gate.unitary(), np.eye(8), atol=1e-12)
        self.assertTrue(gate.generator.is_zero())

    def test_remainder_is_third_order(self):
        deviations = []
        for theta in (0.05, 0.025):
            gate = three_body_gate(self.h1, self.h2, theta)
            deviations.append(operator_distance(gate.unitary(), gate.target_unitary()))
        self.assertTrue(6 <= deviations[0] / deviations[1] <= 10, deviations)


class DecouplingEchoTests(SimpleTestCase):
    def test_local_phase_cancels(self):
        echo = decoupling_echo(H(2, (1.0, 'ZI'), (1.0, 'ZZ')), 0.3)
        self.assertEqual(len(echo.steps), 4)
        self.assertAlmostEqual(echo.ideal.theta, 0.6)
        self.assertAlmostEqual(echo.fidelity(), 1.0, places=12)

    def test_without_fields(self):
        echo = decoupling_echo(H(3, (0.5, 'ZZI'), (-0.2, 'IZZ')), 0.7)
        self.assertTrue(echo.ideal.hamiltonian.isclose(H(3, (0.5, 'ZZI'), (-0.2, 'IZZ'))))
        self.assertAlmostEqual(echo.fidelity(), 1.0, places=12)

    def test_fields_only_gives_identity(self):
        echo = decoupling_echo(H(2, (0.8, 'ZI'), (-0.3, 'IZ')), 1.1)
        u = echo.unitary()
        np.testing.assert_allclose(np.abs(np.diag(u)), np.ones(4), atol=1e-12)
        np.testing.assert_allclose(u / u[0, 0], np.eye(4), atol=1e-12)

    def test_random_fields_exact(self):
        rng = np.random.default_rng(6)
        raw = H(3, *[(rng.normal(), label) for label in ('ZII', 'IZI', 'IIZ', 'ZZI', 'IZZ', 'ZIZ')])
        self.assertAlmostEqual(decoupling_echo(raw, 0.37).fidelity(), 1.0, places=12)

    def test_rejects_transverse_terms(self):
        with self.assertRaises(UsageError):
            decoupling_echo(H(2, (1.0, 'XI'), (1.0, 'ZZ')), 0.1)


class ScheduleValueTests(SimpleTestCase):
    def test_gate_generator(self):
        gate = RawGate('push', 0.5, ((0, 1), (0, 2)), (1.0, 0.125))
        self.assertEqual(gate.generator(3), H(3, (0.5, 'ZZI'), (0.0625, 'ZIZ')))

    def test_self_coupling_rejected(self):
        with self.assertRaises(UsageError):
            RawGate('push', 0.1, ((1, 1),))

    def test_apply_local_is_value(self):
        layer = LocalLayer.identity(2)
        self.assertEqual(ApplyLocal(layer), ApplyLocal(LocalLayer.identity(2)))
