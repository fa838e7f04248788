from rest_framework import serializers

from experiments.adiabatic import RAMPS, STEPPING_MODES
from experiments.protocols import DEFAULT_RESOLUTION
from experiments.spin_models import COUPLING_DISTRIBUTIONS, MODEL_NAMES
from sv_engine.noise import DISTRIBUTIONS
from .models import RunManifest

OUTPUT_FORMATS = ['csv', 'json']
INITIAL_HAMILTONIANS = ['zz_chain', 'xx_chain', 'x_field']


def _float_list(text):
    return [float(v) for v in text.replace(',', ' ').split()]


def _int_list(text):
    return [int(v) for v in text.replace(',', ' ').split()]


class RunManifestSerializer(serializers.ModelSerializer):
    class Meta:
        model = RunManifest
        fields = [
            'id', 'subcommand', 'config_path', 'config_dialect', 'seed', 'out_dir',
            'output_format', 'single_thread', 'jobs', 'checksums', 'exit_code', 'created_at'
        ]
        read_only_fields = ['id', 'created_at']


class HamiltonianSectionSerializer(serializers.Serializer):
    file = serializers.CharField(required=False)
    terms = serializers.CharField(required=False, trim_whitespace=False)
    n_qubits = serializers.IntegerField(required=False, min_value=1)

    def validate(self, attrs):
        if ('file' in attrs) == ('terms' in attrs):
            raise serializers.ValidationError('Give exactly one of "file" or "terms"')
        return attrs


class ModelSectionSerializer(serializers.Serializer):
    name = serializers.ChoiceField(choices=MODEL_NAMES)
    J = serializers.FloatField(default=1.0)
    B = serializers.FloatField(default=0.0)
    direction = serializers.CharField(default='0, 0, 1')
    site_fields = serializers.CharField(required=False)
    couplings = serializers.CharField(required=False)
    seed = serializers.IntegerField(required=False, min_value=0)
    distribution = serializers.ChoiceField(choices=COUPLING_DISTRIBUTIONS, default='uniform')
    pattern = serializers.ChoiceField(choices=['lattice', 'triangular', 'hexagonal'], default='lattice')
    resolution = serializers.IntegerField(default=DEFAULT_RESOLUTION, min_value=1)

    def validate_direction(self, value):
        try:
            direction = tuple(_float_list(value))
        except ValueError:
            raise serializers.ValidationError('Direction must be three numbers, e.g. "0, 0, 1"')
        if len(direction) != 3:
            raise serializers.ValidationError('Direction must be three numbers, e.g. "0, 0, 1"')
        return direction

    def validate_site_fields(self, value):
        try:
            return tuple(_float_list(value))
        except ValueError:
            raise serializers.ValidationError('Fields must be numbers, one per site')

    def validate_couplings(self, value):
        """'0-1: 0.5; 1-2: -0.3'"""
        couplings = {}
        try:
            for item in value.split(';'):
                if not item.strip():
                    continue
                bond, _, strength = item.partition(':')
                a, b = (int(v) for v in bond.split('-'))
                couplings[(a, b)] = float(strength)
        except ValueError:
            raise serializers.ValidationError('Couplings look like "0-1: 0.5; 1-2: -0.3"')
        return couplings


class CompileSectionSerializer(serializers.Serializer):
    T_prime = serializers.FloatField(min_value=0.0)
    epsilon = serializers.FloatField(default=0.01)
    repetitions = serializers.IntegerField(required=False, min_value=1)
    mode = serializers.ChoiceField(choices=['trotter', 'protocol'], default='trotter')
    dt = serializers.FloatField(required=False)

    def validate_epsilon(self, value):
        if not value > 0:
            raise serializers.ValidationError('Error budget must be positive')
        return value

    def validate(self, attrs):
        if attrs['mode'] == 'protocol' and not attrs.get('dt', 0) > 0:
            raise serializers.ValidationError({'dt': 'protocol mode needs a positive cycle time dt'})
        return attrs


class SimulateSectionSerializer(serializers.Serializer):
    initial = serializers.RegexField(r'^[01]+$', required=False)
    state_file = serializers.CharField(required=False)
    schedule_file = serializers.CharField(required=False)
    observables = serializers.CharField(default='')

    def validate_observables(self, value):
        return [item.strip() for item in value.split(';') if item.strip()]


class ErrorsSectionSerializer(serializers.Serializer):
    eta_local = serializers.FloatField(default=0.0, min_value=0.0, max_value=0.999999)
    eta_int = serializers.FloatField(default=0.0, min_value=0.0, max_value=0.999999)
    distribution = serializers.ChoiceField(choices=sorted(DISTRIBUTIONS), default='uniform')
    seed = serializers.IntegerField(required=False, min_value=0, max_value=2 ** 64 - 1)


class AdiabaticSectionSerializer(serializers.Serializer):
    initial = serializers.ChoiceField(choices=INITIAL_HAMILTONIANS, required=False)
    initial_terms = serializers.CharField(required=False, trim_whitespace=False)
    steps = serializers.IntegerField(min_value=1)
    theta1 = serializers.FloatField()
    ramp = serializers.ChoiceField(choices=sorted(RAMPS), default='linear')
    stepping = serializers.ChoiceField(choices=STEPPING_MODES, default='trotter')
    record_every = serializers.IntegerField(default=1, min_value=1)
    gap_samples = serializers.IntegerField(default=0, min_value=0)

    def validate_theta1(self, value):
        if not value > 0:
            raise serializers.ValidationError('theta1 must be positive')
        return value

    def validate(self, attrs):
        if ('initial' in attrs) == ('initial_terms' in attrs):
            raise serializers.ValidationError('Give exactly one of "initial" or "initial_terms"')
        return attrs


class SweepSectionSerializer(serializers.Serializer):
    etas = serializers.CharField()
    steps = serializers.CharField()
    repetitions = serializers.IntegerField(default=20, min_value=1)
    seed = serializers.IntegerField(default=0, min_value=0)

    def validate_etas(self, value):
        try:
            etas = _float_list(value)
        except ValueError:
            raise serializers.ValidationError('Error levels must be numbers, e.g. "0, 0.01, 0.02"')
        if not etas or any(not 0 <= eta < 1 for eta in etas):
            raise serializers.ValidationError('Error levels must lie in [0, 1)')
        return etas

    def validate_steps(self, value):
        try:
            steps = _int_list(value)
        except ValueError:
            raise serializers.ValidationError('Step counts must be integers, e.g. "100, 250"')
        if not steps or min(steps) < 1:
            raise serializers.ValidationError('Step counts must be positive')
        return steps


class CrosstalkSectionSerializer(serializers.Serializer):
    groups = serializers.CharField()
    threshold = serializers.FloatField(required=False)

    def validate_groups(self, value):
        """'0,1; 11,12': ions pushed together, one group per ';'."""
        try:
            groups = [_int_list(item) for item in value.split(';') if item.strip()]
        except ValueError:
            raise serializers.ValidationError('Groups look like "0,1; 11,12"')
        if not groups or any(len(g) < 2 for g in groups):
            raise serializers.ValidationError('Every pushed group needs at least two ions')
        return groups

    def validate_threshold(self, value):
        if not value > 0:
            raise serializers.ValidationError('Crosstalk threshold must be positive')
        return value


class OutputSectionSerializer(serializers.Serializer):
    dialect = serializers.CharField(required=False)
    format = serializers.ChoiceField(choices=OUTPUT_FORMATS, default='csv')
    dir = serializers.CharField(required=False)


SECTION_SERIALIZERS = {
    'hamiltonian': HamiltonianSectionSerializer,
    'model': ModelSectionSerializer,
    'compile': CompileSectionSerializer,
    'simulate': SimulateSectionSerializer,
    'errors': ErrorsSectionSerializer,
    'adiabatic': AdiabaticSectionSerializer,
    'sweep': SweepSectionSerializer,
    'crosstalk': CrosstalkSectionSerializer,
    'output': OutputSectionSerializer,
}
