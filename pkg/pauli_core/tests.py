import math

import numpy as np
from django.test import SimpleTestCase

from uqsim_backend.errors import NonHermitianError, NonUnitaryError, ParseError, SizeMismatchError
from .coeff import CoeffMatrix, coeff_matrix, from_coeff_matrix, pair_coeff_matrix
from .hamiltonian import Hamiltonian, HamiltonianBuilder, commutator, conjugate
from .paulis import PAULI_LABELS, PauliString, pauli_multiply
from .textio import format_hamiltonian, parse_hamiltonian
from .unitaries import SQRT_X, LocalLayer, SingleQubitUnitary


def H(n, *terms):
    return Hamiltonian.from_terms(n, [(c, label) for c, label in terms])


def random_hamiltonian(rng, n, n_terms=6):
    labels = [''.join(rng.choice(PAULI_LABELS, size=n)) for _ in range(n_terms)]
    return Hamiltonian.from_terms(n, [(rng.normal(), label) for label in labels])


def random_unitary(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return SingleQubitUnitary.from_matrix(q * (np.diag(r) / np.abs(np.diag(r))))


class PauliMultiplyTests(SimpleTestCase):
    def test_involution(self):
        phase, r = pauli_multiply(PauliString.from_label('X'), PauliString.from_label('X'))
        self.assertEqual(phase, 1)
        self.assertEqual(r.ops, ('I',))

    def test_xy_is_iz(self):
        phase, r = pauli_multiply(PauliString.from_label('X'), PauliString.from_label('Y'))
        self.assertEqual(phase, 1j)
        self.assertEqual(r.ops, ('Z',))

    def test_two_site_product(self):
        phase, r = pauli_multiply(PauliString.from_label('ZI'), PauliString.from_label('XX'))
        self.assertEqual(phase, 1j)
        self.assertEqual(r.label, 'YX')
        dense = PauliString.from_label('ZI').to_matrix() @ PauliString.from_label('XX').to_matrix()
        np.testing.assert_allclose(dense, phase * r.to_matrix())

    def test_coefficients_multiply(self):
        _, r = pauli_multiply(PauliString.from_label('Z', 2.0), PauliString.from_label('Z', -1.5))
        self.assertEqual(r.coeff, -3.0)

    def test_length_mismatch(self):
        with self.assertRaises(SizeMismatchError):
            pauli_multiply(PauliString.from_label('X'), PauliString.from_label('XX'))

    def test_dense_agreement_and_associativity(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 3):
            for _ in range(20):
                p, q, s = (PauliString(tuple(rng.choice(PAULI_LABELS, size=n))) for _ in range(3))
                phase_pq, pq = pauli_multiply(p, q)
                np.testing.assert_allclose(p.to_matrix() @ q.to_matrix(), phase_pq * pq.to_matrix())
                phase_left, left = pauli_multiply(pq, s)
                phase_qs, qs = pauli_multiply(q, s)
                phase_right, right = pauli_multiply(p, qs)
                self.assertEqual(left.ops, right.ops)
                self.assertAlmostEqual(phase_pq * phase_left, phase_qs * phase_right)


class HamiltonianTests(SimpleTestCase):
    def test_canonical_merge_and_prune(self):
        h = H(2, (1.0, 'ZZ'), (0.5, 'XI'), (-1.0, 'ZZ'), (1e-16, 'YY'))
        self.assertEqual([t.label for t in h.terms], ['XI'])

    def test_sorted_order(self):
        h = H(1, (1.0, 'Z'), (1.0, 'X'), (1.0, 'I'), (1.0, 'Y'))
        self.assertEqual([t.label for t in h.terms], ['I', 'X', 'Y', 'Z'])

    def test_size_mismatch(self):
        with self.assertRaises(SizeMismatchError):
            H(2, (1.0, 'ZZ')) + H(3, (1.0, 'ZZI'))


class CommutatorTests(SimpleTestCase):
    def test_z_x(self):
        result = commutator(H(1, (1.0, 'Z')), H(1, (1.0, 'X')))
        self.assertEqual(len(result.parts), 1)
        coeff, string = result.parts[0]
        self.assertEqual(coeff, 2j)
        self.assertEqual(string.label, 'Y')

    def test_self_commutator_is_empty(self):
        h = H(2, (1.0, 'XX'), (0.3, 'ZI'), (-0.7, 'YZ'))
        self.assertEqual(commutator(h, h).parts, ())
        self.assertTrue(commutator(h, h).generator.is_zero())

    def test_three_body_direction(self):
        generator = commutator(H(3, (1.0, 'IZZ')), H(3, (1.0, 'XXI'))).generator
        self.assertEqual(generator, H(3, (2.0, 'XYZ')))

    def test_matches_dense_commutator(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 3):
            h1, h2 = random_hamiltonian(rng, n), random_hamiltonian(rng, n)
            a, b = h1.to_matrix(), h2.to_matrix()
            result = commutator(h1, h2)
            np.testing.assert_allclose(result.to_matrix(), a @ b - b @ a, atol=1e-12)
            np.testing.assert_allclose(result.generator.to_matrix(), -1j * (a @ b - b @ a), atol=1e-12)

    def test_size_mismatch(self):
        with self.assertRaises(SizeMismatchError):
            commutator(H(1, (1.0, 'Z')), H(2, (1.0, 'ZZ')))


class ConjugateTests(SimpleTestCase):
    def test_identity_layer(self):
        h = H(2, (0.4, 'XY'), (1.0, 'ZI'))
        self.assertEqual(conjugate(h, LocalLayer.identity(2)), h)

    def test_x_layer_flips_fields(self):
        h = H(3, (1.0, 'ZII'), (1.0, 'IZI'), (1.0, 'IIZ'))
        flipped = conjugate(h, LocalLayer.homogeneous(SingleQubitUnitary.pauli('X'), 3))
        self.assertTrue(flipped.isclose(-1.0 * h))

    def test_sqrt_x_maps_zz_to_yy(self):
        gamma = 0.8
        result = conjugate(H(2, (gamma, 'ZZ')), LocalLayer.homogeneous(SQRT_X, 2))
        self.assertTrue(result.isclose(H(2, (gamma, 'YY'))))

    def test_spectrum_and_norm_preserved(self):
        rng = np.random.default_rng(3)
        for n in (1, 2, 3, 4):
            h = random_hamiltonian(rng, n, n_terms=8)
            layer = LocalLayer.inhomogeneous([random_unitary(rng) for _ in range(n)])
            result = conjugate(h, layer)
            np.testing.assert_allclose(
                np.linalg.eigvalsh(result.to_matrix()), np.linalg.eigvalsh(h.to_matrix()), atol=1e-10
            )
            self.assertAlmostEqual(result.coefficient_norm(), h.coefficient_norm(), places=10)
            v = layer.to_matrix()
            np.testing.assert_allclose(result.to_matrix(), v @ h.to_matrix() @ v.conj().T, atol=1e-10)

    def test_non_unitary_rejected(self):
        with self.assertRaises(NonUnitaryError):
            SingleQubitUnitary.from_matrix([[1, 1], [0, 1]])


class CoeffMatrixTests(SimpleTestCase):
    def test_zz(self):
        m = coeff_matrix(H(2, (0.7, 'ZZ')))
        np.testing.assert_array_equal(m.matrix, np.diag([0.0, 0.0, 0.7]))

    def test_heisenberg(self):
        j = 1.3
        m = coeff_matrix(H(2, (j, 'XX'), (j, 'YY'), (j, 'ZZ')))
        np.testing.assert_array_equal(m.matrix, j * np.eye(3))

    def test_antisymmetric_example(self):
        j = 0.5
        m = coeff_matrix(H(2, (j, 'ZY'), (-j, 'YZ'))).matrix
        self.assertEqual(m[2, 1], j)
        self.assertEqual(m[1, 2], -j)
        self.assertEqual(np.count_nonzero(m), 2)

    def test_local_terms_reported_separately(self):
        m = coeff_matrix(H(2, (1.0, 'ZZ'), (0.2, 'XI'), (0.1, 'IY')))
        self.assertEqual(sorted(t.label for t in m.local_terms), ['IY', 'XI'])

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            matrix = rng.normal(size=(3, 3))
            h = from_coeff_matrix(matrix)
            np.testing.assert_array_equal(coeff_matrix(h).matrix, matrix)

    def test_pair_view_inside_larger_register(self):
        h = H(3, (0.5, 'XIZ'), (0.25, 'ZZI'))
        self.assertEqual(pair_coeff_matrix(h, 0, 2).entries[0][2], 0.5)
        self.assertEqual(from_coeff_matrix(CoeffMatrix.diagonal(0, 0, 0.25), n_qubits=3, pair=(0, 1)),
                         H(3, (0.25, 'ZZI')))

    def test_rejects_larger_register(self):
        with self.assertRaises(SizeMismatchError):
            coeff_matrix(H(3, (1.0, 'ZZZ')))


class BuilderTests(SimpleTestCase):
    def test_hopping_expands_to_xx_plus_yy(self):
        h = (HamiltonianBuilder(2)
             .add(1.0, {0: '+', 1: '-'})
             .add(1.0, {0: '-', 1: '+'})
             .build())
        self.assertTrue(h.isclose(H(2, (0.5, 'XX'), (0.5, 'YY'))))

    def test_sigma_plus_matrix(self):
        # σ+ alone is not Hermitian
        with self.assertRaises(NonHermitianError):
            HamiltonianBuilder(1).add(1.0, {0: '+'}).build()
        h = HamiltonianBuilder(1).add(1.0, {0: '+'}).add(1.0, {0: '-'}).build()
        self.assertEqual(h, H(1, (1.0, 'X')))


class TextFormatTests(SimpleTestCase):
    def test_parse_with_comments(self):
        text = '# chain\n0.5 Z Z I\n\n-1.0 I X X\n'
        h = parse_hamiltonian(text)
        self.assertEqual(h, H(3, (0.5, 'ZZI'), (-1.0, 'IXX')))

    def test_format_parses_back(self):
        h = H(2, (math.pi, 'XY'), (1 / 3, 'ZI'))
        self.assertEqual(parse_hamiltonian(format_hamiltonian(h)), h)

    def test_errors_report_line_and_column(self):
        with self.assertRaises(ParseError) as ctx:
            parse_hamiltonian('1.0 Z Z\n2.0 Z Q\n')
        self.assertEqual(ctx.exception.line, 2)
        self.assertEqual(ctx.exception.column, 7)
        with self.assertRaises(ParseError):
            parse_hamiltonian('abc Z\n')
        with self.assertRaises(ParseError):
            parse_hamiltonian('1.0 Z Z\n1.0 Z\n')

    def test_empty_needs_size(self):
        self.assertTrue(parse_hamiltonian('# nothing\n', n_qubits=2).is_zero())
        with self.assertRaises(ParseError):
            parse_hamiltonian('')

    def test_empty_hamiltonian_round_trips(self):
        parsed = parse_hamiltonian(format_hamiltonian(Hamiltonian.zero(3)))
        self.assertTrue(parsed.is_zero())
        self.assertEqual(parsed.n_qubits, 3)

    def test_header_size_must_agree(self):
        text = format_hamiltonian(H(2, (1.0, 'ZZ')))
        with self.assertRaises(ParseError) as ctx:
            parse_hamiltonian(text, n_qubits=3)
        self.assertEqual(ctx.exception.line, 1)
