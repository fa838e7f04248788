import math

import numpy as np
from django.test import SimpleTestCase, override_settings
from scipy import linalg

from avg_compiler.schedule import PulseSchedule
from avg_compiler.trotter import trotter_schedule
from hardware.traps import TrapArrayModel, push_gate
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.paulis import PauliString
from pauli_core.unitaries import LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import (
    ConfigPolicyError, DenseCapExceeded, NumericFailure, ParseError, SizeMismatchError, UsageError,
)
from .executor import parse_execution_log, run_schedule
from .noise import ErrorModel
from .oracle import (
    SpectrumCache, dense_unitary, eigenspace_histogram, exact_evolve, exact_unitary, ground_state,
    pick_ground_vector,
)
from .state import (
    StateVector, apply_local_layer, apply_zz_gates, dump_state, energy, fidelity, observables,
    parse_state_dump, pauli_expectation,
)


def H(n, *terms):
    return Hamiltonian.from_terms(n, terms)


def random_state(rng, n):
    amplitudes = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(amplitudes / np.linalg.norm(amplitudes))


def random_unitary(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return SingleQubitUnitary.from_matrix(q * (np.diag(r) / np.abs(np.diag(r))))


def small_schedule():
    target = H(3, (0.8, 'ZZI'), (-0.5, 'IXX'), (0.3, 'YII'), (0.2, 'IIZ'))
    return trotter_schedule(target, 0.4, 0.05, TrapArrayModel.chain(3))


class StateVectorTests(SimpleTestCase):
    def test_from_bits_is_little_endian(self):
        state = StateVector.from_bits([1, 0, 1])
        self.assertEqual(int(np.flatnonzero(state.amplitudes)[0]), 5)

    def test_size_must_be_power_of_two(self):
        with self.assertRaises(SizeMismatchError):
            StateVector(np.ones(3) / math.sqrt(3))

    def test_unnormalised_rejected(self):
        with self.assertRaises(NumericFailure):
            StateVector([1.0, 1.0])

    @override_settings(UQS_STATEVECTOR_CAP=2)
    def test_statevector_cap(self):
        with self.assertRaises(UsageError):
            StateVector.zero(3)


class LocalLayerKernelTests(SimpleTestCase):
    def test_identity_layer(self):
        state = random_state(np.random.default_rng(0), 3)
        self.assertEqual(apply_local_layer(state, LocalLayer.identity(3)), state)

    def test_x_layer_flips_every_qubit(self):
        layer = LocalLayer.homogeneous(SingleQubitUnitary.pauli('X'), 4)
        result = apply_local_layer(StateVector.zero(4), layer)
        np.testing.assert_allclose(result.amplitudes, StateVector.basis(4, 15).amplitudes)

    def test_matches_dense_layer(self):
        rng = np.random.default_rng(1)
        state = random_state(rng, 3)
        layer = LocalLayer.inhomogeneous([random_unitary(rng) for _ in range(3)])
        expected = layer.to_matrix() @ state.amplitudes
        np.testing.assert_allclose(apply_local_layer(state, layer).amplitudes, expected, atol=1e-12)

    def test_zero_eta_is_bit_identical(self):
        rng = np.random.default_rng(2)
        state = random_state(rng, 3)
        layer = LocalLayer.inhomogeneous([random_unitary(rng) for _ in range(3)])
        noisy = apply_local_layer(state, layer, ErrorModel(0.0, 0.0, seed=11))
        self.assertEqual(noisy, apply_local_layer(state, layer))

    def test_size_mismatch(self):
        with self.assertRaises(SizeMismatchError):
            apply_local_layer(StateVector.zero(2), LocalLayer.identity(3))


class ZZKernelTests(SimpleTestCase):
    def test_zero_angle(self):
        state = random_state(np.random.default_rng(3), 2)
        self.assertEqual(apply_zz_gates(state, [(0, 1, 0.0)]), state)

    def test_parity_phases(self):
        state = StateVector(np.full(4, 0.5))
        theta = math.pi / 4
        result = apply_zz_gates(state, [(0, 1, theta)])
        signs = np.array([1, -1, -1, 1])
        np.testing.assert_allclose(result.amplitudes, 0.5 * np.exp(-1j * theta * signs), atol=1e-15)

    def test_push_chain_matches_dense(self):
        model = TrapArrayModel.chain(3)
        gate = push_gate(model, [0, 1, 2], 0.3)
        state = random_state(np.random.default_rng(4), 3)
        expected = linalg.expm(-1j * gate.generator(3).to_matrix()) @ state.amplitudes
        np.testing.assert_allclose(apply_zz_gates(state, gate.zz_angles()).amplitudes, expected, atol=1e-12)

    def test_rejects_self_coupling(self):
        with self.assertRaises(UsageError):
            apply_zz_gates(StateVector.zero(2), [(1, 1, 0.2)])


class RunScheduleTests(SimpleTestCase):
    def test_empty_schedule(self):
        state = random_state(np.random.default_rng(5), 2)
        result, log = run_schedule(state, PulseSchedule.empty(2))
        self.assertEqual(result, state)
        self.assertEqual(log.instructions, 0)

    def test_noiseless_run_matches_dense_unitary(self):
        schedule = small_schedule()
        state = random_state(np.random.default_rng(6), 3)
        result, _ = run_schedule(state, schedule)
        np.testing.assert_allclose(result.amplitudes, dense_unitary(schedule) @ state.amplitudes, atol=1e-10)

    def test_zero_error_model_matches_noiseless(self):
        schedule = small_schedule()
        state = StateVector.zero(3)
        clean, _ = run_schedule(state, schedule)
        seeded, log = run_schedule(state, schedule, ErrorModel(seed=3))
        self.assertEqual(clean, seeded)
        self.assertEqual(log.draws, [])

    def test_same_seed_same_amplitudes(self):
        schedule = small_schedule()
        err = ErrorModel(0.05, 0.05, seed=7)
        first, _ = run_schedule(StateVector.zero(3), schedule, err)
        second, _ = run_schedule(StateVector.zero(3), schedule, err)
        self.assertEqual(first, second)
        other, _ = run_schedule(StateVector.zero(3), schedule, err.with_seed(8))
        self.assertNotEqual(first, other)

    def test_replay_reproduces_run(self):
        schedule = small_schedule()
        err = ErrorModel(0.02, 0.04, seed=2024, distribution='normal')
        first, log = run_schedule(StateVector.zero(3), schedule, err)
        self.assertEqual(log.instructions, len(schedule))
        replayed, _ = run_schedule(StateVector.zero(3), schedule, replay=parse_execution_log(log.to_text()))
        self.assertEqual(first, replayed)

    def test_noise_needs_seed(self):
        with self.assertRaises(ConfigPolicyError) as ctx:
            run_schedule(StateVector.zero(3), small_schedule(), ErrorModel(0.01, 0.0))
        self.assertEqual(ctx.exception.exit_code, 3)

    def test_draws_stay_in_range(self):
        err = ErrorModel(0.01, 0.03, seed=1)
        _, log = run_schedule(StateVector.zero(3), small_schedule(), err)
        for _, channel, values in log.draws:
            bound = 0.01 if channel == 'local' else 0.03
            self.assertTrue(all(abs(v) <= bound for v in values))

    def test_eta_range(self):
        with self.assertRaises(UsageError):
            ErrorModel(1.0, 0.0, seed=1)


class ExactEvolutionTests(SimpleTestCase):
    def test_zero_time(self):
        rng = np.random.default_rng(7)
        h = H(2, (0.4, 'XY'), (1.1, 'ZI'))
        state = random_state(rng, 2)
        np.testing.assert_allclose(exact_evolve(h, 0.0, state).amplitudes, state.amplitudes, atol=1e-12)

    def test_z_half_turn(self):
        plus = StateVector(np.array([1, 1]) / math.sqrt(2))
        result = exact_evolve(H(1, (1.0, 'Z')), math.pi / 2, plus)
        np.testing.assert_allclose(result.amplitudes, np.array([-1j, 1j]) / math.sqrt(2), atol=1e-12)

    def test_singlet_phase(self):
        h = H(2, (1.0, 'XX'), (1.0, 'YY'), (1.0, 'ZZ'))
        singlet = StateVector(np.array([0, 1, -1, 0]) / math.sqrt(2))
        t = 0.37
        result = exact_evolve(h, t, singlet)
        np.testing.assert_allclose(result.amplitudes, np.exp(3j * t) * singlet.amplitudes, atol=1e-12)

    def test_group_law(self):
        rng = np.random.default_rng(8)
        h = H(3, (0.5, 'XXI'), (-0.2, 'IYZ'), (0.9, 'ZIZ'), (0.3, 'IXI'))
        state = random_state(rng, 3)
        cache = SpectrumCache.from_hamiltonian(h)
        once = exact_evolve(h, 0.7, state, cache)
        twice = exact_evolve(h, 0.4, exact_evolve(h, 0.3, state, cache), cache)
        np.testing.assert_allclose(once.amplitudes, twice.amplitudes, atol=1e-12)

    def test_unitary_matches_expm(self):
        h = H(2, (0.5, 'XY'), (0.7, 'ZZ'))
        np.testing.assert_allclose(exact_unitary(h, 0.9), linalg.expm(-0.9j * h.to_matrix()), atol=1e-12)

    @override_settings(UQS_DENSE_CAP=2)
    def test_dense_cap(self):
        with self.assertRaises(DenseCapExceeded):
            exact_unitary(H(3, (1.0, 'ZZZ')), 0.1)


class GroundStateTests(SimpleTestCase):
    def test_field_ground_state(self):
        h = H(3, (1.0, 'ZII'), (1.0, 'IZI'), (1.0, 'IIZ'))
        ground = ground_state(h)
        self.assertAlmostEqual(ground.energy, -3.0)
        self.assertEqual(ground.degeneracy, 1)
        np.testing.assert_allclose(np.abs(ground.state.amplitudes), StateVector.basis(3, 7).amplitudes.real,
                                   atol=1e-12)

    def test_degenerate_ground_space(self):
        with self.assertLogs('sv_engine.oracle', 'WARNING'):
            ground = ground_state(H(2, (1.0, 'ZZ')))
        self.assertEqual(ground.degeneracy, 2)
        self.assertAlmostEqual(ground.energy, -1.0)
        np.testing.assert_allclose(ground.state.amplitudes, StateVector.basis(2, 1).amplitudes, atol=1e-12)

    def test_ground_vector_follows_first_reachable_amplitude(self):
        # |01> carries the most weight, but |00> is the first basis state the space reaches
        first = np.array([0.6, 0.0, 0.0, 0.8], dtype=complex)
        second = np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)
        rotation = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        basis = np.column_stack([first, second]) @ rotation * 1j
        np.testing.assert_allclose(pick_ground_vector(basis), first, atol=1e-12)

    def test_histogram_sums_to_one(self):
        rng = np.random.default_rng(9)
        h = H(3, (1.0, 'XXI'), (1.0, 'YYI'), (1.0, 'IZZ'))
        histogram = eigenspace_histogram(random_state(rng, 3), h)
        self.assertAlmostEqual(sum(w for _, w in histogram), 1.0, places=9)
        energies = [e for e, _ in histogram]
        self.assertEqual(energies, sorted(energies))

    def test_ground_state_weight_in_histogram(self):
        h = H(2, (1.0, 'XX'), (1.0, 'YY'), (1.0, 'ZZ'))
        ground = ground_state(h)
        histogram = eigenspace_histogram(ground.state, h)
        self.assertAlmostEqual(histogram[0][1], 1.0, places=12)


class MeasurementTests(SimpleTestCase):
    def test_fidelity_properties(self):
        rng = np.random.default_rng(10)
        psi, phi = random_state(rng, 2), random_state(rng, 2)
        self.assertAlmostEqual(fidelity(psi, psi), 1.0, places=12)
        self.assertAlmostEqual(fidelity(psi, phi), fidelity(phi, psi), places=12)
        self.assertEqual(fidelity(StateVector.basis(2, 0), StateVector.basis(2, 3)), 0.0)
        rotated = StateVector(np.exp(0.3j) * psi.amplitudes)
        self.assertAlmostEqual(fidelity(psi, rotated), 1.0, places=12)

    def test_z_on_zero(self):
        self.assertEqual(observables(StateVector.zero(1), ['Z0']), [('Z0', 1.0)])

    def test_zz_on_odd_superposition(self):
        state = StateVector(np.array([0, 1, 1, 0]) / math.sqrt(2))
        [(name, value)] = observables(state, ['Z0 Z1'])
        self.assertEqual(name, 'Z0 Z1')
        self.assertAlmostEqual(value, -1.0)

    def test_expectations_match_dense(self):
        rng = np.random.default_rng(11)
        state = random_state(rng, 3)
        for sites in ({0: 'X', 1: 'X'}, {0: 'Y', 2: 'Z'}, {1: 'Y'}):
            string = PauliString.on_sites(3, sites)
            expected = np.vdot(state.amplitudes, string.to_matrix() @ state.amplitudes).real
            self.assertAlmostEqual(pauli_expectation(state, string), expected, places=12)

    def test_energy_matches_dense(self):
        rng = np.random.default_rng(12)
        state = random_state(rng, 3)
        h = H(3, (0.5, 'XXI'), (-1.5, 'IYY'), (0.25, 'ZIZ'), (0.1, 'IIX'))
        expected = np.vdot(state.amplitudes, h.to_matrix() @ state.amplitudes).real
        self.assertAlmostEqual(energy(state, h), expected, places=12)

    def test_malformed_observable(self):
        for request in ('Q0', 'Z', 'Z5', 'Z0 X0'):
            with self.assertRaises(UsageError):
                observables(StateVector.zero(2), [request])


class StateDumpTests(SimpleTestCase):
    def test_round_trip(self):
        state = random_state(np.random.default_rng(13), 3)
        self.assertEqual(parse_state_dump(dump_state(state)), state)

    def test_header(self):
        text = dump_state(StateVector.zero(2))
        self.assertTrue(text.startswith('# uqs-state/1\n# n_qubits=2\n# endianness=little'))

    def test_malformed_line(self):
        with self.assertRaises(ParseError) as ctx:
            parse_state_dump('# n_qubits=1\n0 1.0\n')
        self.assertEqual(ctx.exception.line, 2)
