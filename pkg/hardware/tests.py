from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from avg_compiler.schedule import ApplyLocal, PulseSchedule, RawGate
from avg_compiler.trotter import trotter_schedule
from pauli_core.hamiltonian import Hamiltonian
from pauli_core.unitaries import SQRT_X, LocalLayer, SingleQubitUnitary
from uqsim_backend.errors import (
    HardwareConstraintError, NumericFailure, ParseError, SingularSystemError, UsageError,
)
from .addressing import beam_compensation, gaussian_profile
from .description import format_hardware, parse_hardware
from .lattice import LatticeModel, geometry_remap, uqs1_gate
from .realize import realize_schedule
from .traps import (
    PulseProfile, TrapArrayModel, crosstalk_report, push_gate, theta_from_pulse, uqs2_push,
)


def H(n, *terms):
    return Hamiltonian.from_terms(n, terms)


def degrees(pairs, n):
    count = [0] * n
    for a, b in pairs:
        count[a] += 1
        count[b] += 1
    return count


class LatticeGateTests(SimpleTestCase):
    def test_open_chain(self):
        lattice_gate = uqs1_gate(LatticeModel.chain(4), 1, 0.2)
        self.assertEqual(lattice_gate.gate.targets, ((0, 1), (1, 2), (2, 3)))
        self.assertEqual(lattice_gate.generator, H(4, (1.0, 'ZZII'), (1.0, 'IZZI'), (1.0, 'IIZZ')))
        self.assertEqual(lattice_gate.gate.theta, 0.2)

    def test_periodic_chain_wraps(self):
        lattice_gate = uqs1_gate(LatticeModel.chain(4, boundary='periodic'), 1, 0.2)
        self.assertEqual(len(lattice_gate.gate.targets), 4)
        self.assertEqual(lattice_gate.generator.coefficient('ZIIZ'), 1.0)

    def test_longer_displacement(self):
        model = LatticeModel.chain(5, available_j=frozenset({1, 2}))
        self.assertEqual(uqs1_gate(model, 2, 0.1).gate.targets, ((0, 2), (1, 3), (2, 4)))
        with self.assertRaises(HardwareConstraintError):
            uqs1_gate(model, 3, 0.1)

    def test_grid_axes(self):
        model = LatticeModel.grid(2, 3)
        self.assertEqual(len(uqs1_gate(model, 1, 0.1).gate.targets), 7)
        self.assertEqual(uqs1_gate(model, 1, 0.1, axis='h').gate.gate_id, 'K1h')
        self.assertEqual(len(uqs1_gate(model, 1, 0.1, axis='v').gate.targets), 3)

    def test_translation_classes_with_diagonal(self):
        classes = LatticeModel.grid(3, 3, diagonal=True).translation_classes()
        self.assertEqual(sorted(classes), ['K1d', 'K1h', 'K1v'])
        self.assertEqual(len(classes['K1d']), 4)


class GeometryRemapTests(SimpleTestCase):
    def test_triangular_counts(self):
        self.assertEqual(len(geometry_remap('triangular', LatticeModel.grid(2, 2))), 5)
        pairs = geometry_remap('triangular', LatticeModel.grid(3, 3))
        self.assertEqual(len(pairs), 16)
        self.assertEqual(len(geometry_remap('rectangular', LatticeModel.grid(3, 3))), 12)

    def test_triangular_interior_degree(self):
        base = LatticeModel.grid(4, 4)
        self.assertEqual(degrees(geometry_remap('triangular', base), 16)[base.site(1, 1)], 6)

    def test_hexagonal_degree(self):
        self.assertLessEqual(max(degrees(geometry_remap('hexagonal', LatticeModel.grid(4, 4)), 16)), 3)

    def test_needs_grid(self):
        with self.assertRaises(UsageError):
            geometry_remap('triangular', LatticeModel.chain(4))
        with self.assertRaises(UsageError):
            geometry_remap('kagome', LatticeModel.grid(2, 2))


class TrapArrayTests(SimpleTestCase):
    def test_push_falls_off_as_inverse_cube(self):
        push = uqs2_push(TrapArrayModel.chain(3), [0, 1, 2], 1.0)
        self.assertEqual(push, H(3, (1.0, 'ZZI'), (1.0, 'IZZ'), (0.125, 'ZIZ')))

    def test_push_gate_weights(self):
        gate = push_gate(TrapArrayModel.chain(4, spacing=2.0), [0, 3], 0.5)
        self.assertEqual(gate.targets, ((0, 3),))
        self.assertAlmostEqual(gate.weights[0], 6.0 ** -3)

    def test_needs_two_ions(self):
        with self.assertRaises(UsageError):
            uqs2_push(TrapArrayModel.chain(3), [1], 1.0)

    def test_ions_closer_than_spacing(self):
        with self.assertRaises(UsageError):
            TrapArrayModel(((0.0,), (0.5,)))

    def test_rectangular_pulse(self):
        with self.assertLogs('hardware.traps', 'WARNING'):
            profile = PulseProfile.rectangular(2.0, 1e-3)
        self.assertAlmostEqual(theta_from_pulse(profile, profile, TrapArrayModel.chain(2), 1.0), -2.0)

    def test_triangular_pulse(self):
        profile = PulseProfile.triangular(1.5, 1e-4)
        theta = theta_from_pulse(profile, profile, TrapArrayModel.chain(2), 1.0)
        self.assertAlmostEqual(theta, -0.5, delta=1e-6)

    def test_pulse_phase_scales_with_distance(self):
        profile = PulseProfile.triangular(1.0, 1e-3)
        model = TrapArrayModel.chain(3, kappa=2.0)
        near = theta_from_pulse(profile, profile, model, 1.0)
        far = theta_from_pulse(profile, profile, model, 2.0)
        self.assertAlmostEqual(far / near, 0.125)


class CrosstalkTests(SimpleTestCase):
    model = TrapArrayModel.chain(13)

    def test_ten_sites_apart(self):
        report = crosstalk_report(self.model, [(0, 1), (11, 12)])
        self.assertAlmostEqual(report.max_ratio, 1e-3, places=15)

    def test_adjacent_pairs_serialise(self):
        report = crosstalk_report(self.model, [(0, 1), (2, 3)])
        self.assertAlmostEqual(report.max_ratio, 1.0)
        self.assertFalse(report.concurrent)
        self.assertEqual(report.as_dict()['verdict'], 'serialized')

    def test_single_group(self):
        report = crosstalk_report(self.model, [(4, 5)])
        self.assertEqual(report.max_ratio, 0.0)
        self.assertTrue(report.concurrent)

    def test_overlapping_groups(self):
        with self.assertRaises(UsageError):
            crosstalk_report(self.model, [(0, 1), (1, 2)])


class BeamCompensationTests(SimpleTestCase):
    def test_only_target_rotates(self):
        tau = 0.3
        result = beam_compensation([0, 1, 2, 3, 4], 2, tau, width=1.5)
        np.testing.assert_allclose(result.angles, [0, 0, tau, 0, 0], atol=1e-8)
        layer = result.rotations()
        for qubit in (0, 1, 3, 4):
            self.assertTrue(layer.unitary(qubit).is_identity(1e-8))
        np.testing.assert_allclose(layer.unitary(2).matrix, SingleQubitUnitary.rotation('x', tau).matrix,
                                   atol=1e-8)
        self.assertLess(result.residual, 1e-8)

    def test_coincident_atoms(self):
        with self.assertRaises(SingularSystemError):
            beam_compensation([0.0, 0.0, 1.0], 2, 0.1)

    def test_negligible_overlap(self):
        tau, nu0 = 0.4, 2.0
        result = beam_compensation([0, 1, 2], 1, tau, nu0=nu0, width=0.05)
        self.assertAlmostEqual(result.durations[1], -tau / nu0)
        self.assertEqual(result.negative, (1,))
        self.assertAlmostEqual(result.durations[0], 0.0)

    def test_beams_compose_to_target_rotation(self):
        positions, target, tau, width = [0, 1, 2, 3, 4], 1, 0.25, 1.5
        result = beam_compensation(positions, target, tau, width=width)
        f = gaussian_profile(width)
        for atom in range(len(positions)):
            total = np.eye(2, dtype=complex)
            for beam, duration in enumerate(result.durations):
                phase = -1.0 if beam == target else 1.0
                angle = phase * duration * f(abs(positions[atom] - positions[beam]))
                total = SingleQubitUnitary.rotation('x', angle).matrix @ total
            expected = SingleQubitUnitary.rotation('x', tau if atom == target else 0.0).matrix
            self.assertLess(np.linalg.norm(total - expected, 2), 1e-8)

    def test_inaccurate_solution_is_rejected(self):
        with mock.patch('hardware.addressing.linalg.solve', return_value=np.zeros(3)):
            with self.assertRaises(NumericFailure):
                beam_compensation([0, 1, 2], 1, 0.3)


class RealizeTests(SimpleTestCase):
    def test_ising_chain_uses_one_displacement(self):
        target = H(4, (0.5, 'ZZII'), (0.5, 'IZZI'), (0.5, 'IIZZ'))
        hw = LatticeModel.chain(4)
        schedule = realize_schedule(trotter_schedule(target, 1.0, 0.01, hw), hw)
        self.assertEqual([g.gate_id for g in schedule.gates()], ['K1'])
        self.assertIn('lattice round trips per cycle: 1', schedule.notes)

    def test_random_ising_needs_addressability(self):
        target = H(4, (0.5, 'ZZII'), (-0.1, 'IZZI'), (0.9, 'IIZZ'))
        with self.assertRaises(HardwareConstraintError):
            trotter_schedule(target, 1.0, 0.01, LatticeModel.chain(4))

    def test_partial_class_rejected(self):
        schedule = PulseSchedule(3, (RawGate('K1', 0.1, ((0, 1),)),))
        with self.assertRaises(HardwareConstraintError):
            realize_schedule(schedule, LatticeModel.chain(3))

    def test_inhomogeneous_layer_rejected(self):
        layer = LocalLayer.on_qubits(3, {0: SQRT_X})
        schedule = PulseSchedule(3, (ApplyLocal(layer),))
        with self.assertRaises(HardwareConstraintError):
            realize_schedule(schedule, LatticeModel.chain(3))
        realized = realize_schedule(schedule, LatticeModel.chain(3, addressable=True))
        self.assertEqual(realized.cycle, schedule.cycle)

    def test_distant_pushes_share_a_slot(self):
        model = TrapArrayModel.chain(13, crosstalk_threshold=2e-3)
        gates = (RawGate('push', 0.1, ((0, 1),)), RawGate('push', 0.2, ((11, 12),)),
                 RawGate('push', 0.3, ((1, 2),)))
        realized = realize_schedule(PulseSchedule(13, gates), model)
        self.assertEqual([g.slot for g in realized.gates()], [0, 0, 1])
        self.assertIn('concurrent push groups per cycle: 1', realized.notes)

    def test_crosstalk_realism_adds_parasitic_gate(self):
        model = TrapArrayModel.chain(13, crosstalk_threshold=2e-3, crosstalk_realism=True)
        gates = (RawGate('push', 0.1, ((0, 1),)), RawGate('push', 0.2, ((11, 12),)))
        realized = realize_schedule(PulseSchedule(13, gates), model)
        parasitic = [g for g in realized.gates() if g.gate_id == 'crosstalk']
        self.assertEqual(len(parasitic), 1)
        self.assertEqual(len(parasitic[0].targets), 4)
        self.assertAlmostEqual(max(parasitic[0].weights), 0.1 * 10.0 ** -3)

    def test_unknown_gate_on_traps(self):
        schedule = PulseSchedule(3, (RawGate('K1', 0.1, ((0, 1), (1, 2))),))
        with self.assertRaises(HardwareConstraintError):
            realize_schedule(schedule, TrapArrayModel.chain(3))


class DescriptionTests(SimpleTestCase):
    def test_lattice_description(self):
        model = parse_hardware('platform = uqs1\nshape = 7\navailable_j = 1, 2, 3\n')
        self.assertEqual(model, LatticeModel((7,), available_j=frozenset({1, 2, 3})))

    def test_trap_description(self):
        model = parse_hardware('[hardware]\nplatform = uqs2\npositions = 0; 1; 2.5\nkappa = 0.5\n')
        self.assertEqual(model.positions, ((0.0,), (1.0,), (2.5,)))
        self.assertEqual(model.kappa, 0.5)

    def test_format_round_trip(self):
        for model in (LatticeModel.grid(3, 4, available_j=frozenset({1, 2}), diagonal=True),
                      TrapArrayModel.chain(4, spacing=1.5, crosstalk_realism=True)):
            self.assertEqual(parse_hardware(format_hardware(model)), model)

    def test_missing_shape(self):
        with self.assertRaises(UsageError) as ctx:
            parse_hardware('platform = uqs1\n')
        self.assertIn('hardware.shape', str(ctx.exception))

    def test_malformed_text(self):
        with self.assertRaises(ParseError):
            parse_hardware('platform = uqs1\nshape = 7\nnot a key value line\n')
