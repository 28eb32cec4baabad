# src/experiments/serializers.py
from rest_framework import serializers

from core.exceptions import ToolkitError
from outer_lp.geometry import TentGeometry
from sparse_builder.context import IterationSettings
from wavepacket.params import WavePacketParams, transition_band
from weights.services import check_experiment_exponents


class WeightExponentsField(serializers.Field):
    """Comma separated floats, e.g. 0,0.1,0.2"""

    def to_internal_value(self, data):
        if isinstance(data, (list, tuple)):
            items = list(data)
        else:
            items = [item for item in str(data).split(',') if item.strip()]
        try:
            values = [float(item) for item in items]
        except (TypeError, ValueError):
            raise serializers.ValidationError(f"Expected comma separated numbers, got {data!r}")
        if not values:
            raise serializers.ValidationError("At least one weight exponent is required")
        return values

    def to_representation(self, value):
        return ','.join(str(float(a)) for a in value)


class RunConfigSerializer(serializers.Serializer):
    """Every free constant of a run; validate() enforces the cross-field invariants"""
    # wave packet
    b = serializers.FloatField()
    d = serializers.FloatField()
    eps = serializers.FloatField()
    d_prime = serializers.FloatField()
    d_doubleprime = serializers.FloatField()
    sharpness = serializers.FloatField(min_value=0)

    # tent geometry, in multiples of b
    theta_low = serializers.FloatField()
    theta_high = serializers.FloatField()
    theta_o_low = serializers.FloatField()
    theta_o_high = serializers.FloatField()

    # grids
    spacing = serializers.FloatField()
    window = serializers.FloatField()
    scale_count = serializers.IntegerField(min_value=0)
    scales_per_octave = serializers.IntegerField(min_value=1)
    c_eta = serializers.FloatField()
    frequency_count = serializers.IntegerField(min_value=2)
    frequency_low = serializers.FloatField()
    frequency_high = serializers.FloatField()
    eta_low = serializers.FloatField()
    eta_high = serializers.FloatField()
    pad_factor = serializers.IntegerField(min_value=1)

    # exponents
    r = serializers.FloatField()
    p = serializers.FloatField(min_value=1)
    q = serializers.FloatField()
    t = serializers.FloatField()

    # iteration
    c_initial = serializers.FloatField()
    epsilon = serializers.FloatField(min_value=0)
    generation_cap = serializers.IntegerField(min_value=1)
    packing_exponent = serializers.IntegerField(min_value=1)
    embedding_k = serializers.FloatField()
    max_removals = serializers.IntegerField(min_value=0)

    # experiments
    corpus_size = serializers.IntegerField(min_value=1)
    weight_exponents = WeightExponentsField()
    sparse_scale_count = serializers.IntegerField(min_value=0)

    seed = serializers.IntegerField(min_value=0)
    threads = serializers.IntegerField(min_value=1)

    def validate(self, data):
        if not data['spacing'] > 0:
            raise serializers.ValidationError({'spacing': "Sample spacing must be positive"})
        if not data['window'] >= 2 * data['spacing']:
            raise serializers.ValidationError({'window': "The window must hold at least two samples"})
        if not data['c_eta'] > 0:
            raise serializers.ValidationError({'c_eta': "c_eta must be positive"})
        if not data['frequency_low'] < data['frequency_high']:
            raise serializers.ValidationError({'frequency_low': "Frequency band is empty"})
        if not data['eta_low'] < data['eta_high']:
            raise serializers.ValidationError({'eta_low': "Modulation band is empty"})

        # the domain objects own their invariants; surface their messages as field errors
        try:
            params = WavePacketParams(b=data['b'], d=data['d'], eps=data['eps'], d_prime=data['d_prime'],
                                      d_doubleprime=data['d_doubleprime'], sharpness=data['sharpness'])
            transition_band(params)
        except ToolkitError as e:
            raise serializers.ValidationError({'wave_packet': str(e)})
        try:
            geometry = TentGeometry(theta=(params.b * data['theta_low'], params.b * data['theta_high']),
                                    theta_o=(params.b * data['theta_o_low'], params.b * data['theta_o_high']))
            geometry.require_packet_support(params.b)
        except ToolkitError as e:
            raise serializers.ValidationError({'tent_geometry': str(e)})
        try:
            check_experiment_exponents(data['r'], data['q'], data['t'])
        except ToolkitError as e:
            raise serializers.ValidationError({'exponents': str(e)})
        try:
            IterationSettings(c_initial=data['c_initial'], packing_exponent=data['packing_exponent'],
                              embedding_k=data['embedding_k'], max_removals=data['max_removals'],
                              generation_cap=data['generation_cap'], epsilon=data['epsilon'],
                              threads=data['threads'])
        except ToolkitError as e:
            raise serializers.ValidationError({'iteration': str(e)})
        return data
