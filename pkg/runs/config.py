"""
Run configuration files (dialect ``uqs-ini/1``).

INI sections, each validated by its serializer in ``runs.serializers``::

    [hardware]      platform, gamma, shape / positions / n_ions, ...  or  file = hw.ini
    [hamiltonian]   terms = <one "coeff P P ..." per line>  or  file = target.txt
    [model]         name = dipole | ising | heisenberg | random_ising, J, B, ...
    [compile]       T_prime, epsilon, repetitions, mode = trotter | protocol, dt
    [simulate]      initial = 0101, observables = Z0; X0 X1, schedule_file
    [errors]        eta_local, eta_int, distribution, seed
    [adiabatic]     initial = zz_chain | xx_chain | x_field, steps, theta1, ramp, stepping
    [sweep]         etas, steps, repetitions, seed
    [crosstalk]     groups = 0,1; 11,12, threshold
    [output]        dialect, format = csv | json, dir

Relative file references resolve against the directory of the config file.
"""
import configparser
import logging
from pathlib import Path

from django.conf import settings

from experiments.spin_models import NamedModel, SiteGeometry, build_model, initial_hamiltonian
from hardware.description import parse_hardware
from hardware.lattice import LatticeModel
from hardware.serializers import build_hardware
from pauli_core.textio import parse_hamiltonian
from sv_engine.noise import ErrorModel
from uqsim_backend.errors import ParseError, UsageError, usage_error_from
from .serializers import SECTION_SERIALIZERS

logger = logging.getLogger(__name__)


class RunConfig:
    def __init__(self, parser, path='<string>', base_dir=None):
        self.parser = parser
        self.path = str(path)
        self.base_dir = Path(base_dir) if base_dir else Path.cwd()
        self._sections = {}
        if self.dialect != settings.UQS_CONFIG_DIALECT:
            raise UsageError(
                f'Config dialect {self.dialect!r} is not supported; expected {settings.UQS_CONFIG_DIALECT!r}'
            )

    @classmethod
    def from_string(cls, text, path='<string>', base_dir=None):
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text, source=str(path))
        except configparser.ParsingError as exc:
            line_no = exc.errors[0][0] if exc.errors else None
            raise ParseError(f'malformed config {path}: {exc.message.splitlines()[0]}', line_no) from None
        except configparser.Error as exc:
            raise ParseError(f'malformed config {path}: {exc}', getattr(exc, 'lineno', None)) from None
        unknown = [s for s in parser.sections() if s not in SECTION_SERIALIZERS and s != 'hardware']
        if unknown:
            raise UsageError(f'Unknown config section(s) {unknown}')
        return cls(parser, path, base_dir)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise UsageError(f'Cannot read config {path}: {exc.strerror}') from None
        logger.info('Loaded config %s', path)
        return cls.from_string(text, path, path.parent)

    def has(self, name):
        return self.parser.has_section(name)

    def raw(self, name):
        return dict(self.parser[name]) if self.has(name) else {}

    def section(self, name, required=True):
        """Validated values of ``[name]``; an absent optional section gives its defaults."""
        if name not in self._sections:
            if required and not self.has(name):
                raise UsageError(f'Config {self.path} lacks a [{name}] section')
            serializer = SECTION_SERIALIZERS[name](data=self.raw(name))
            if not serializer.is_valid():
                raise usage_error_from(serializer.errors, name)
            self._sections[name] = serializer.validated_data
        return self._sections[name]

    @property
    def dialect(self):
        return self.raw('output').get('dialect', settings.UQS_CONFIG_DIALECT)

    def read_file(self, reference):
        path = Path(reference)
        if not path.is_absolute():
            path = self.base_dir / path
        try:
            return path.read_text()
        except OSError as exc:
            raise UsageError(f'Cannot read {path}: {exc.strerror}') from None

    def hardware(self):
        raw = self.raw('hardware')
        if not raw:
            raise UsageError(f'Config {self.path} lacks a [hardware] section')
        if 'file' in raw:
            return parse_hardware(self.read_file(raw['file']))
        return build_hardware(raw)

    def model_spec(self):
        data = self.section('model')
        return NamedModel(
            data['name'], data['J'], data['B'], data['direction'], data.get('site_fields', ()),
            data.get('couplings', {}), data.get('seed'), data['distribution'],
        )

    def geometry(self, hw):
        pattern = self.section('model', required=False)['pattern'] if self.has('model') else 'lattice'
        if pattern == 'lattice':
            return SiteGeometry.from_hardware(hw)
        if not isinstance(hw, LatticeModel) or hw.dims != 2:
            raise UsageError(f'Pattern {pattern} needs a 2D uqs1 lattice')
        return SiteGeometry.grid(*hw.shape, pattern=pattern)

    def hamiltonian(self, hw=None):
        """Target from [hamiltonian], or the named model of [model] on the hardware geometry."""
        if self.has('hamiltonian'):
            data = self.section('hamiltonian')
            text = self.read_file(data['file']) if 'file' in data else data['terms']
            n_qubits = data.get('n_qubits') or (hw.n_qubits if hw is not None else None)
            return parse_hamiltonian(text, n_qubits)
        if self.has('model'):
            if hw is None:
                raise UsageError('A [model] target needs a [hardware] section for its geometry')
            return build_model(self.model_spec(), self.geometry(hw))
        raise UsageError(f'Config {self.path} needs a [hamiltonian] or [model] section')

    def initial_hamiltonian(self, hw):
        data = self.section('adiabatic')
        if 'initial_terms' in data:
            return parse_hamiltonian(data['initial_terms'], hw.n_qubits)
        return initial_hamiltonian(data['initial'], self.geometry(hw))

    def error_model(self, seed=None):
        """[errors] with ``seed`` (the --seed flag) taking precedence over the file."""
        data = self.section('errors', required=False)
        seed = seed if seed is not None else data.get('seed')
        return ErrorModel(data['eta_local'], data['eta_int'], seed, data['distribution'])

    def output(self):
        return self.section('output', required=False)
