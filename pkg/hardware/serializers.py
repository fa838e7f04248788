from rest_framework import serializers

from uqsim_backend.errors import usage_error_from
from .lattice import BOUNDARIES, LatticeModel
from .traps import DEFAULT_CROSSTALK_THRESHOLD, TrapArrayModel


def _int_list(text):
    return [int(v) for v in text.replace(',', ' ').split()]


def _positions(text):
    """'0; 1; 2.5' for a chain, '0,0; 1,0; 0,1' for a plane."""
    return [tuple(float(x) for x in item.split(',')) for item in text.split(';') if item.strip()]


class HardwareSerializer(serializers.Serializer):
    platform = serializers.ChoiceField(choices=['uqs1', 'uqs2'])
    gamma = serializers.FloatField(default=1.0)

    # uqs1
    shape = serializers.CharField(required=False)
    boundary = serializers.ChoiceField(choices=BOUNDARIES, default='open')
    available_j = serializers.CharField(default='1')
    addressable = serializers.BooleanField(default=False)
    diagonal = serializers.BooleanField(default=False)

    # uqs2
    positions = serializers.CharField(required=False)
    n_ions = serializers.IntegerField(required=False, min_value=1)
    spacing = serializers.FloatField(default=1.0, min_value=1.0)
    kappa = serializers.FloatField(default=1.0)
    crosstalk_threshold = serializers.FloatField(default=DEFAULT_CROSSTALK_THRESHOLD, min_value=0.0)
    crosstalk_realism = serializers.BooleanField(default=False)

    def validate_gamma(self, value):
        if value == 0:
            raise serializers.ValidationError('Raw coupling must be nonzero')
        return value

    def validate_shape(self, value):
        try:
            shape = tuple(int(v) for v in value.lower().replace('x', ' ').split())
        except ValueError:
            raise serializers.ValidationError('Use "N" for a chain or "RxC" for a grid')
        if len(shape) not in (1, 2) or min(shape) < 1:
            raise serializers.ValidationError('Use "N" for a chain or "RxC" for a grid')
        return shape

    def validate_available_j(self, value):
        try:
            return frozenset(_int_list(value))
        except ValueError:
            raise serializers.ValidationError('Displacements must be integers, e.g. "1, 2, 3"')

    def validate_positions(self, value):
        try:
            return _positions(value)
        except ValueError:
            raise serializers.ValidationError('Positions must be numbers separated by ";"')

    def validate(self, attrs):
        if attrs['platform'] == 'uqs1' and 'shape' not in attrs:
            raise serializers.ValidationError({'shape': 'uqs1 needs a lattice shape'})
        if attrs['platform'] == 'uqs2' and 'positions' not in attrs and 'n_ions' not in attrs:
            raise serializers.ValidationError({'positions': 'uqs2 needs positions or n_ions'})
        return attrs

    def build(self):
        data = self.validated_data
        if data['platform'] == 'uqs1':
            return LatticeModel(
                data['shape'], data['boundary'], data['available_j'], data['gamma'],
                data['addressable'], data['diagonal'],
            )
        if 'positions' in data:
            positions = data['positions']
        else:
            positions = [(data['spacing'] * k,) for k in range(data['n_ions'])]
        return TrapArrayModel(
            tuple(positions), data['kappa'], data['crosstalk_threshold'], data['gamma'],
            data['crosstalk_realism'],
        )


def build_hardware(data, section='hardware'):
    serializer = HardwareSerializer(data=data)
    if not serializer.is_valid():
        raise usage_error_from(serializer.errors, section)
    return serializer.build()
