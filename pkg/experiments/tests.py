import math

import numpy as np
from django.test import SimpleTestCase, tag

from hardware.lattice import LatticeModel
from hardware.traps import TrapArrayModel
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.paulis import PauliString
from sv_engine.noise import ErrorModel
from sv_engine.oracle import dense_unitary, exact_unitary, operator_distance
from uqsim_backend.errors import (
    ConfigPolicyError, HardwareConstraintError, InfeasibleError, NumericFailure, UsageError,
)
from .adiabatic import AdiabaticConfig, adiabatic_run, error_sweep, min_gap, prepare_path, run_seed
from .protocols import firing_rounds, frequency_plan, protocol_for_model
from .spin_models import NamedModel, SiteGeometry, build_model


def H(n, *terms):
    return Hamiltonian.from_terms(n, terms)


def relabel(h, perm):
    return Hamiltonian.from_terms(h.n_qubits, (
        PauliString(tuple(t.ops[perm[q]] for q in range(h.n_qubits)), t.coeff) for t in h.terms
    ))


def xx_chain(n):
    return Hamiltonian.from_terms(n, (
        PauliString.on_sites(n, {a: 'X', a + 1: 'X'}) for a in range(n - 1)
    ))


def two_qubit_path(**kwargs):
    """Transverse field into a field-biased ZZ bond with a unique ground state."""
    values = dict(
        h_initial=H(2, (1.0, 'XI'), (1.0, 'IX')),
        h_target=H(2, (1.0, 'ZZ'), (0.5, 'ZI'), (0.3, 'IZ')),
        steps=2500,
        theta1=0.02,
    )
    values.update(kwargs)
    return AdiabaticConfig(**values)


class BuildModelTests(SimpleTestCase):
    def test_ising_pair(self):
        h = build_model(NamedModel('ising', J=1.5), SiteGeometry.chain(2))
        self.assertTrue(h.isclose(H(2, (-0.75, 'ZZ'))))

    def test_dipole_pair_at_unit_distance(self):
        h = build_model(NamedModel('dipole', J=1.0), SiteGeometry.chain(2))
        self.assertTrue(h.isclose(H(2, (0.5, 'XX'), (0.5, 'YY'))))

    def test_dipole_inverse_cube(self):
        h = build_model(NamedModel('dipole', J=2.0), SiteGeometry.chain(3))
        self.assertAlmostEqual(h.coefficient('XIX'), 2.0 / (2 * 8), places=12)
        self.assertAlmostEqual(h.coefficient('YYI'), 1.0, places=12)
        self.assertEqual(h.coefficient('XYI'), 0.0)

    def test_heisenberg_with_field(self):
        spec = NamedModel('heisenberg', J=1.0, B=0.3)
        h = build_model(spec, SiteGeometry.chain(2))
        expected = H(2, (-0.5, 'XX'), (-0.5, 'YY'), (-0.5, 'ZZ'), (0.3, 'ZI'), (0.3, 'IZ'))
        self.assertTrue(h.isclose(expected))

    def test_field_direction(self):
        spec = NamedModel('ising', J=0.0, B=1.0, direction=(0.6, 0.0, 0.8))
        h = build_model(spec, SiteGeometry.chain(2))
        self.assertAlmostEqual(h.coefficient('XI'), 0.6)
        self.assertAlmostEqual(h.coefficient('IZ'), 0.8)

    def test_direction_must_be_unit(self):
        with self.assertRaises(UsageError):
            NamedModel('ising', direction=(1.0, 1.0, 0.0))

    def test_unknown_model(self):
        with self.assertRaises(UsageError):
            NamedModel('xyz')

    def test_random_ising_is_reproducible_from_seed(self):
        geometry = SiteGeometry.chain(4)
        first = build_model(NamedModel('random_ising', seed=11), geometry)
        second = build_model(NamedModel('random_ising', seed=11), geometry)
        other = build_model(NamedModel('random_ising', seed=12), geometry)
        self.assertEqual(first, second)
        self.assertNotEqual(first, other)
        self.assertEqual(len(first), 3)

    def test_random_ising_without_seed(self):
        with self.assertRaises(ConfigPolicyError) as ctx:
            build_model(NamedModel('random_ising'), SiteGeometry.chain(3))
        self.assertEqual(ctx.exception.exit_code, 3)

    def test_random_ising_explicit_couplings_and_fields(self):
        spec = NamedModel('random_ising', couplings={(1, 0): 1.0, (1, 2): -0.4}, fields=(0.1, 0.2, 0.3))
        h = build_model(spec, SiteGeometry.chain(3))
        expected = H(3, (-0.5, 'ZZI'), (0.2, 'IZZ'), (0.1, 'XII'), (0.2, 'IXI'), (0.3, 'IIX'))
        self.assertTrue(h.isclose(expected))

    def test_random_ising_couplings_must_cover_bonds(self):
        spec = NamedModel('random_ising', couplings={(0, 1): 1.0})
        with self.assertRaises(UsageError):
            build_model(spec, SiteGeometry.chain(3))

    def test_ising_invariant_under_ring_automorphisms(self):
        geometry = SiteGeometry.chain(5, periodic=True)
        h = build_model(NamedModel('ising', J=0.7, B=0.2), geometry)
        for perm in ([1, 2, 3, 4, 0], [4, 3, 2, 1, 0]):
            self.assertEqual(relabel(h, perm), h)

    def test_triangular_grid_bonds(self):
        geometry = SiteGeometry.grid(2, 2, pattern='triangular')
        h = build_model(NamedModel('ising', J=-2.0), geometry)
        self.assertEqual(len(h), 5)


class ProtocolTests(SimpleTestCase):
    def test_dipole_on_traps_is_exact(self):
        hw = TrapArrayModel.chain(4)
        spec = NamedModel('dipole', J=1.0)
        protocol = protocol_for_model(spec, hw)
        self.assertTrue(protocol.exact)
        self.assertAlmostEqual(protocol.scale, 1.0, places=12)
        target = build_model(spec, SiteGeometry.from_hardware(hw))
        self.assertTrue(protocol.effective_hamiltonian().isclose(target, 1e-12))
        self.assertEqual(len(protocol.blocks[0].gates), 1)

    def test_dipole_scale_is_positive_time_rescale(self):
        protocol = protocol_for_model(NamedModel('dipole', J=4.0), TrapArrayModel.chain(3))
        self.assertAlmostEqual(protocol.scale, 0.25, places=12)

    def test_dipole_on_lattice_decays_with_cube(self):
        hw = LatticeModel.chain(4, available_j={1, 2, 3})
        protocol = protocol_for_model(NamedModel('dipole'), hw)
        thetas = [gate.theta for gate in protocol.blocks[0].gates]
        self.assertAlmostEqual(thetas[1] / thetas[0], 1 / 8, places=12)
        self.assertAlmostEqual(thetas[2] / thetas[0], 1 / 27, places=12)
        self.assertTrue(protocol.exact)

    def test_truncated_dipole_sum_warns(self):
        hw = LatticeModel.chain(4)
        with self.assertLogs('experiments.protocols', 'WARNING'):
            protocol = protocol_for_model(NamedModel('dipole'), hw)
        self.assertFalse(protocol.exact)

    def test_heisenberg_on_lattice_has_three_homogeneous_layers(self):
        hw = LatticeModel.chain(4, gamma=-1.0)
        protocol = protocol_for_model(NamedModel('heisenberg', J=1.0), hw)
        layers = [i for i in protocol.cycle(0.1) if hasattr(i, 'layer')]
        self.assertEqual(len(layers), 3)
        self.assertTrue(all(i.layer.uniform() for i in layers))
        schedule = protocol.schedule(0.5, 0.1)
        self.assertEqual(schedule.repetitions, 5)

    def test_heisenberg_sign_mismatch(self):
        with self.assertRaises(InfeasibleError) as ctx:
            protocol_for_model(NamedModel('heisenberg', J=1.0), LatticeModel.chain(3))
        self.assertIn('sign', str(ctx.exception))
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_ising_on_traps_matches_exact_evolution(self):
        hw = TrapArrayModel.chain(3)
        spec = NamedModel('ising', J=-1.0)
        protocol = protocol_for_model(spec, hw)
        schedule = protocol.schedule(0.5, 0.1)
        target = build_model(spec, SiteGeometry.from_hardware(hw))
        distance = operator_distance(dense_unitary(schedule), exact_unitary(target, 0.5))
        self.assertLess(distance, 1e-10)

    def test_ising_on_spread_traps_compensates_distance(self):
        hw = TrapArrayModel(((0.0,), (1.0,), (3.0,)))
        geometry = SiteGeometry(hw.positions, ((0, 1), (1, 2)))
        protocol = protocol_for_model(NamedModel('ising', J=-1.0), hw, geometry)
        self.assertTrue(protocol.exact)
        weights = [gate.theta * gate.weights[0] for gate in protocol.blocks[0].gates]
        np.testing.assert_allclose(weights, [1.0, 1.0])

    def test_frequency_plan_counts(self):
        counts = frequency_plan({(0, 1): 1.0, (1, 2): -0.5, (2, 3): 0.01}, resolution=8)
        self.assertEqual(counts, {(0, 1): 8, (1, 2): 4, (2, 3): 0})
        rounds = firing_rounds([8, 4, 1], 8)
        self.assertEqual(sum(0 in r for r in rounds), 8)
        self.assertEqual(sum(1 in r for r in rounds), 4)
        self.assertEqual(sum(2 in r for r in rounds), 1)

    def test_random_ising_frequency_protocol_on_traps(self):
        hw = TrapArrayModel.chain(3)
        spec = NamedModel('random_ising', couplings={(0, 1): 1.0, (1, 2): -0.5})
        protocol = protocol_for_model(spec, hw)
        self.assertEqual(protocol.frequency_plan, (((0, 1), 8), ((1, 2), 4)))
        self.assertEqual(len(protocol.rounds), 8)
        self.assertTrue(protocol.exact)
        self.assertAlmostEqual(protocol.scale, 16.0, places=12)
        target = build_model(spec, SiteGeometry.from_hardware(hw))
        schedule = protocol.schedule(0.3, 0.1)
        distance = operator_distance(dense_unitary(schedule), exact_unitary(target, 0.3))
        self.assertLess(distance, 1e-10)

    def test_quantised_couplings_warn(self):
        spec = NamedModel('random_ising', couplings={(0, 1): 1.0, (1, 2): 0.3})
        with self.assertLogs('experiments.protocols', 'WARNING'):
            protocol = protocol_for_model(spec, TrapArrayModel.chain(3))
        self.assertFalse(protocol.exact)

    def test_random_ising_needs_addressable_lattice(self):
        spec = NamedModel('random_ising', seed=3)
        with self.assertRaises(HardwareConstraintError) as ctx:
            protocol_for_model(spec, LatticeModel.chain(3))
        self.assertIn('requires single qubit addressability', str(ctx.exception))

    def test_random_ising_on_addressable_lattice(self):
        spec = NamedModel('random_ising', couplings={(0, 1): -1.0, (1, 2): -0.4}, B=0.2)
        hw = LatticeModel.chain(3, addressable=True)
        protocol = protocol_for_model(spec, hw)
        self.assertTrue(protocol.exact)
        target = build_model(spec, SiteGeometry.from_hardware(hw))
        two_body = target.two_body_part()
        self.assertTrue(protocol.effective_hamiltonian().isclose(protocol.scale * two_body, 1e-10))

    def test_size_mismatch(self):
        with self.assertRaises(UsageError):
            protocol_for_model(NamedModel('ising'), TrapArrayModel.chain(3), SiteGeometry.chain(4))


class MinGapTests(SimpleTestCase):
    def test_single_qubit_crossing(self):
        report = min_gap(H(1, (1.0, 'Z')), H(1, (1.0, 'X')), samples=101)
        self.assertAlmostEqual(report.min_gap, math.sqrt(2), places=10)
        self.assertAlmostEqual(report.k_at_min, 0.5, places=12)
        self.assertAlmostEqual(report.recommended_time, 1 / math.sqrt(2), places=10)

    def test_identical_endpoints_give_constant_gap(self):
        h = H(2, (1.0, 'ZZ'), (0.5, 'XI'))
        report = min_gap(h, h, samples=11)
        np.testing.assert_allclose(report.gaps, [report.gaps[0]] * 11, atol=1e-12)

    def test_gapless_path(self):
        with self.assertRaises(NumericFailure) as ctx:
            min_gap(Hamiltonian.zero(1), Hamiltonian.zero(1))
        self.assertIn('gapless path', str(ctx.exception))


class AdiabaticRunTests(SimpleTestCase):
    def test_config_validation(self):
        with self.assertRaises(UsageError):
            two_qubit_path(steps=0)
        with self.assertRaises(UsageError):
            two_qubit_path(ramp='cubic')
        with self.assertRaises(UsageError):
            two_qubit_path(stepping='exact', error_model=ErrorModel(0.01, 0.01, seed=1))

    def test_ramps_run_from_one_to_zero(self):
        for ramp in ('linear', 'cosine'):
            config = two_qubit_path(steps=10, ramp=ramp)
            ks = [config.k(s) for s in range(11)]
            self.assertAlmostEqual(ks[0], 1.0)
            self.assertAlmostEqual(ks[-1], 0.0)
            self.assertTrue(all(a >= b for a, b in zip(ks, ks[1:])))

    def test_slow_trotter_run_reaches_ground_state(self):
        hw = TrapArrayModel.chain(2)
        result = adiabatic_run(two_qubit_path(), hw)
        self.assertGreater(result.final_fidelity, 0.95)
        self.assertEqual(len(result.trajectory), 2500)
        weights = [w for _, w in result.histogram]
        self.assertAlmostEqual(sum(weights), 1.0, places=9)
        self.assertAlmostEqual(weights[0], result.final_fidelity, places=9)
        report = min_gap(two_qubit_path().h_initial, two_qubit_path().h_target)
        self.assertGreater(result.total_time, report.recommended_time)

    def test_exact_stepping_reaches_ground_state(self):
        result = adiabatic_run(two_qubit_path(stepping='exact'))
        self.assertGreater(result.final_fidelity, 0.98)

    def test_trajectory_stride(self):
        config = two_qubit_path(steps=95, record_every=10)
        result = adiabatic_run(config, TrapArrayModel.chain(2))
        self.assertEqual([p.step for p in result.trajectory], [10, 20, 30, 40, 50, 60, 70, 80, 90, 95])
        self.assertEqual(result.trajectory[-1].k, 0.0)

    def test_single_step(self):
        result = adiabatic_run(two_qubit_path(steps=1), TrapArrayModel.chain(2))
        self.assertEqual(len(result.trajectory), 1)

    def test_zero_error_matches_noiseless_run(self):
        hw = TrapArrayModel.chain(2)
        plain = adiabatic_run(two_qubit_path(steps=40), hw)
        zero = adiabatic_run(two_qubit_path(steps=40, error_model=ErrorModel(0.0, 0.0, seed=5)), hw)
        self.assertEqual(plain.final_fidelity, zero.final_fidelity)
        self.assertEqual(zero.log.draws, [])

    def test_noisy_runs_are_seeded(self):
        hw = TrapArrayModel.chain(2)
        path = prepare_path(two_qubit_path(steps=40), hw)
        runs = [
            adiabatic_run(two_qubit_path(steps=40, error_model=ErrorModel(0.02, 0.02, seed=seed)), hw, path)
            for seed in (7, 7, 8)
        ]
        self.assertEqual(runs[0].final_fidelity, runs[1].final_fidelity)
        self.assertNotEqual(runs[0].final_fidelity, runs[2].final_fidelity)
        self.assertTrue(runs[0].log.draws)

    def test_noise_needs_seed(self):
        config = two_qubit_path(steps=5, error_model=ErrorModel(0.01, 0.01))
        with self.assertRaises(ConfigPolicyError):
            adiabatic_run(config, TrapArrayModel.chain(2))

    def test_trotter_stepping_needs_hardware(self):
        with self.assertRaises(UsageError):
            adiabatic_run(two_qubit_path(steps=5))


class ErrorSweepTests(SimpleTestCase):
    def setUp(self):
        self.hw = TrapArrayModel.chain(2)
        self.config = two_qubit_path(steps=10)

    def test_grid_shape(self):
        rows = error_sweep(self.config, self.hw, [0.0, 0.01, 0.02, 0.03, 0.04], [5, 10, 15, 20],
                           repetitions=2, seed=4)
        self.assertEqual(len(rows), 20)
        self.assertEqual({(r.eta, r.steps) for r in rows},
                         {(e, s) for e in (0.0, 0.01, 0.02, 0.03, 0.04) for s in (5, 10, 15, 20)})

    def test_zero_error_column_is_deterministic(self):
        rows = error_sweep(self.config, self.hw, [0.0], [12], repetitions=5)
        deterministic = adiabatic_run(two_qubit_path(steps=12), self.hw)
        self.assertEqual(rows[0].n, 1)
        self.assertEqual(rows[0].std, 0.0)
        self.assertAlmostEqual(rows[0].mean, deterministic.final_fidelity, places=12)

    def test_parallel_matches_serial(self):
        serial = error_sweep(self.config, self.hw, [0.02], [8], repetitions=4, seed=9)
        parallel = error_sweep(self.config, self.hw, [0.02], [8], repetitions=4, seed=9, jobs=3)
        self.assertEqual(serial, parallel)

    def test_run_seeds_are_independent(self):
        seeds = {run_seed(0, i, j, r) for i in range(3) for j in range(3) for r in range(3)}
        self.assertEqual(len(seeds), 27)
        self.assertEqual(run_seed(0, 1, 2, 3), run_seed(0, 1, 2, 3))

    def test_empty_grid(self):
        with self.assertRaises(UsageError):
            error_sweep(self.config, self.hw, [], [5])


@tag('slow')
class DipoleRampTests(SimpleTestCase):
    """Seven-ion chain ramped from Σ Z Z into the dipolar Hamiltonian."""

    def setUp(self):
        self.hw = TrapArrayModel.chain(7)
        self.h_dipole = build_model(NamedModel('dipole'), SiteGeometry.from_hardware(self.hw))
        self.h_initial = H(7, *[(1.0, 'I' * a + 'ZZ' + 'I' * (5 - a)) for a in range(6)])

    def test_hundred_step_trajectory(self):
        config = AdiabaticConfig(self.h_initial, self.h_dipole, steps=100, theta1=0.1,
                                 error_model=ErrorModel(0.01, 0.005, seed=1))
        result = adiabatic_run(config, self.hw)
        self.assertEqual(len(result.trajectory), 100)
        for point in result.trajectory:
            self.assertGreaterEqual(point.fidelity, 0.0)
            self.assertLessEqual(point.fidelity, 1.0)
        self.assertAlmostEqual(sum(w for _, w in result.histogram), 1.0, places=9)

    def test_path_has_positive_gap(self):
        report = min_gap(self.h_initial, self.h_dipole, samples=21)
        self.assertGreater(report.min_gap, 0.0)
        self.assertTrue(math.isfinite(report.recommended_time))

    def test_xx_start_on_nine_ions(self):
        hw = TrapArrayModel.chain(9)
        target = build_model(NamedModel('dipole'), SiteGeometry.from_hardware(hw))
        config = AdiabaticConfig(xx_chain(9), target, steps=50, theta1=0.025,
                                 error_model=ErrorModel(0.01, 0.01, seed=2))
        result = adiabatic_run(config, hw)
        self.assertEqual(len(result.trajectory), 50)
        self.assertTrue(0.0 <= result.final_fidelity <= 1.0)


@tag('slow')
class RampConvergenceTests(SimpleTestCase):
    """Monte-Carlo trends of the ramped dipolar runs."""

    def assertRising(self, rows):
        for lower, upper in zip(rows, rows[1:]):
            margin = math.hypot(lower.sem, upper.sem)
            self.assertGreater(upper.mean - lower.mean, margin,
                               f'{lower.steps} -> {upper.steps} steps')

    def test_nine_ion_weight_grows_with_steps(self):
        hw = TrapArrayModel.chain(9)
        target = build_model(NamedModel('dipole'), SiteGeometry.from_hardware(hw))
        config = AdiabaticConfig(xx_chain(9), target, steps=50, theta1=0.025)
        rows = error_sweep(config, hw, [0.01], [50, 100, 500], repetitions=20, seed=5)
        self.assertEqual([row.steps for row in rows], [50, 100, 500])
        self.assertRising(rows)

        clean = adiabatic_run(AdiabaticConfig(xx_chain(9), target, steps=1500, theta1=0.025,
                                              record_every=1500), hw)
        self.assertGreaterEqual(clean.final_fidelity, 0.99)

    def test_seven_ion_weight_falls_with_error(self):
        hw = TrapArrayModel.chain(7)
        target = build_model(NamedModel('dipole'), SiteGeometry.from_hardware(hw))
        initial = H(7, *[(1.0, 'I' * a + 'ZZ' + 'I' * (5 - a)) for a in range(6)])
        config = AdiabaticConfig(initial, target, steps=100, theta1=0.025)
        rows = error_sweep(config, hw, [0.0, 0.01, 0.02, 0.03, 0.04], [100], repetitions=20, seed=7)
        self.assertEqual(rows[0].n, 1)
        for cleaner, noisier in zip(rows, rows[1:]):
            self.assertLessEqual(noisier.mean, cleaner.mean + math.hypot(cleaner.sem, noisier.sem),
                                 f'eta {cleaner.eta} -> {noisier.eta}')

    def test_ramp_longer_than_gap_time_stays_in_ground_space(self):
        hw = TrapArrayModel.chain(7)
        target = build_model(NamedModel('dipole'), SiteGeometry.from_hardware(hw))
        initial = H(7, *[(1.0, 'I' * a + 'ZZ' + 'I' * (5 - a)) for a in range(6)])
        threshold = 10.0 / min_gap(initial, target, samples=51).min_gap

        steps = 100
        while True:
            config = AdiabaticConfig(initial, target, steps=steps, theta1=0.1,
                                     stepping='exact', record_every=steps)
            if math.fsum(point.dt for point in prepare_path(config)) > threshold:
                break
            steps *= 2
        result = adiabatic_run(config)
        self.assertGreater(result.total_time, threshold)
        self.assertGreaterEqual(result.final_fidelity, 0.9)
