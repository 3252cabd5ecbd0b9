"""
JSON configuration documents (schema in configs/SCHEMA.md).

Every nested object rejects unknown keys, and the domain dataclasses are built
inside ``validate`` so their invariants surface as field errors before any job
starts.
"""

import io
from collections.abc import Mapping

from django.conf import settings
from rest_framework import serializers
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.settings import api_settings

from .config import RunConfig, SweepConfig, Thresholds
from .diagnostics import DiagnosticsConfig, LadderPolicy, ResolvedDiagnostics
from .exceptions import ConfigError, SimulacionError
from .grid import GridSpec
from .model import InitialSpec, ModelParams, Preset, make_initial_data
from .solver import StepControl

UNKNOWN_FIELD = 'Campo desconocido.'


def _require_positive(value, name):
    if not value > 0:
        raise serializers.ValidationError(f"debe cumplir {name} > 0")
    return value


def _require_bounded_multiple(value):
    if not value > 1:
        raise serializers.ValidationError('debe cumplir bounded_multiple > 1')
    return value


def _defaults(serializer_class):
    return lambda: serializer_class().run_validation({})


class StrictSerializer(serializers.Serializer):

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: [UNKNOWN_FIELD] for key in unknown})
        return super().to_internal_value(data)


class PresetField(serializers.ChoiceField):

    def __init__(self, **kwargs):
        super().__init__(choices=[preset.value for preset in Preset], **kwargs)

    def to_internal_value(self, data):
        return Preset(super().to_internal_value(data))

    def to_representation(self, value):
        return Preset(value).value


class GridSerializer(StrictSerializer):
    cells = serializers.ListField(child=serializers.IntegerField(), min_length=1, max_length=2)
    extent = serializers.ListField(child=serializers.FloatField(), min_length=1, max_length=2)

    def validate(self, attrs):
        try:
            return GridSpec(cells=tuple(attrs['cells']), extent=tuple(attrs['extent']))
        except SimulacionError as exc:
            raise serializers.ValidationError(str(exc))


class ModelParamsSerializer(StrictSerializer):
    m = serializers.FloatField()
    q = serializers.FloatField()
    sigma = serializers.FloatField(default=0.0)

    def validate_m(self, value):
        return _require_positive(value, 'm')

    def validate_q(self, value):
        return _require_positive(value, 'q')

    def validate_sigma(self, value):
        if not 0 <= value < 1:
            raise serializers.ValidationError('debe cumplir 0 <= sigma < 1')
        return value


class InitialSerializer(StrictSerializer):
    preset = PresetField()
    value = serializers.FloatField(default=1.0, min_value=0.0)
    mass = serializers.FloatField(default=None, allow_null=True)
    critical_mass_multiple = serializers.FloatField(required=False, write_only=True)
    width = serializers.FloatField(default=0.1, min_value=0.0)
    center = serializers.ListField(child=serializers.FloatField(), default=None, allow_null=True)
    amplitude = serializers.FloatField(default=1.0, min_value=0.0)
    v_value = serializers.FloatField(default=0.0, min_value=0.0)

    def validate(self, attrs):
        multiple = attrs.pop('critical_mass_multiple', None)
        if multiple is not None:
            if attrs['mass'] is not None:
                raise serializers.ValidationError(
                    'mass y critical_mass_multiple son mutuamente excluyentes')
            attrs['mass'] = multiple * settings.SIMULACION_CRITICAL_MASS
        if attrs['preset'] in (Preset.GAUSSIAN, Preset.TWO_BUMPS) and attrs['mass'] is None:
            raise serializers.ValidationError({'mass': ['requerido para este preset']})
        if attrs['mass'] is not None and not attrs['mass'] > 0:
            raise serializers.ValidationError({'mass': ['debe cumplir mass > 0']})
        if attrs['center'] is not None:
            attrs['center'] = tuple(attrs['center'])
        return attrs


class ControlSerializer(StrictSerializer):
    safety = serializers.FloatField(default=0.4)
    # None: filled from the horizon (1e-12 T and T).
    dt_min = serializers.FloatField(default=None, allow_null=True)
    dt_max = serializers.FloatField(default=None, allow_null=True)
    v_solve_tol = serializers.FloatField(default=1e-10)
    v_solve_max_iters = serializers.IntegerField(default=10_000)
    sup_multiple = serializers.FloatField(default=1e4)
    resolution_floor = serializers.FloatField(default=StepControl.resolution_floor, min_value=0.0)
    disable_chemotaxis = serializers.BooleanField(default=False)
    check_invariants = serializers.BooleanField(default=True)


class LadderSerializer(StrictSerializer):
    mode = serializers.ChoiceField(choices=['sup_multiple', 'fixed'], default='sup_multiple')
    value = serializers.FloatField(default=1.0)

    def validate_value(self, value):
        return _require_positive(value, 'value')

    def validate(self, attrs):
        return LadderPolicy(**attrs)


class DiagnosticsSerializer(StrictSerializer):
    p_list = serializers.ListField(child=serializers.FloatField(min_value=1.0),
                                   default=[1.0, 2.0], min_length=1)
    p_fr1 = serializers.FloatField(default=None, allow_null=True)
    s = serializers.FloatField(default=None, allow_null=True)
    ladder = LadderSerializer(default=LadderPolicy)
    n_max = serializers.IntegerField(default=10, min_value=0, max_value=50)
    n_analytic = serializers.IntegerField(default=None, allow_null=True, min_value=2)

    def validate_p_list(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError('los valores de p deben ser distintos')
        return tuple(value)

    def validate(self, attrs):
        # The list default skips validate_p_list.
        attrs['p_list'] = tuple(attrs['p_list'])
        return DiagnosticsConfig(**attrs)


class ClassificationSerializer(StrictSerializer):
    bounded_multiple = serializers.FloatField(default=50.0)

    def validate_bounded_multiple(self, value):
        return _require_bounded_multiple(value)


class RunSerializer(StrictSerializer):
    grid = GridSerializer()
    model = ModelParamsSerializer(source='params')
    initial = InitialSerializer()
    control = ControlSerializer(default=_defaults(ControlSerializer))
    diagnostics = DiagnosticsSerializer(default=DiagnosticsConfig)
    classification = ClassificationSerializer(source='*', default=dict)
    horizon = serializers.FloatField()
    samples = serializers.IntegerField(default=11, min_value=2)
    seed = serializers.IntegerField(default=0, min_value=0)

    def validate_horizon(self, value):
        return _require_positive(value, 'horizon')

    def validate(self, attrs):
        grid = attrs['grid']
        horizon = attrs['horizon']
        errors = {}
        try:
            params = ModelParams(dim=grid.dim, **attrs['params'])
        except SimulacionError as exc:
            raise serializers.ValidationError({'model': [str(exc)]})

        control = dict(attrs['control'])
        if control['dt_min'] is None:
            control['dt_min'] = 1e-12 * horizon
        if control['dt_max'] is None:
            control['dt_max'] = horizon
        try:
            control = StepControl(**control)
        except SimulacionError as exc:
            errors['control'] = [str(exc)]

        center = attrs['initial']['center']
        if center is not None and len(center) != grid.dim:
            errors['initial'] = [f'center debe tener {grid.dim} coordenadas']
        initial = InitialSpec(seed=attrs['seed'], **attrs['initial'])
        if 'initial' not in errors:
            try:
                make_initial_data(initial, grid)
            except SimulacionError as exc:
                errors['initial'] = [str(exc)]

        diagnostics = attrs['diagnostics']
        try:
            ResolvedDiagnostics.build(params, diagnostics)
        except (SimulacionError, ValueError) as exc:
            errors['diagnostics'] = [str(exc)]
        if errors:
            raise serializers.ValidationError(errors)

        return RunConfig(
            params=params,
            grid=grid,
            initial=initial,
            control=control,
            horizon=horizon,
            samples=attrs['samples'],
            diagnostics=diagnostics,
            bounded_multiple=attrs.get('bounded_multiple', 50.0),
            seed=attrs['seed'],
        )


class ThresholdsSerializer(StrictSerializer):
    sup_multiple = serializers.FloatField(default=None, allow_null=True)
    dt_min = serializers.FloatField(default=None, allow_null=True)
    bounded_multiple = serializers.FloatField(default=None, allow_null=True)

    def validate_bounded_multiple(self, value):
        if value is None:
            return value
        return _require_bounded_multiple(value)

    def validate(self, attrs):
        return Thresholds(**attrs)


def _strictly_increasing(values):
    if any(later <= earlier for earlier, later in zip(values, values[1:])):
        raise serializers.ValidationError('debe ser estrictamente creciente')
    if any(not value > 0 for value in values):
        raise serializers.ValidationError('todos los valores deben ser positivos')
    return tuple(values)


class SweepPlanSerializer(StrictSerializer):
    m_grid = serializers.ListField(child=serializers.FloatField(), min_length=1)
    q_grid = serializers.ListField(child=serializers.FloatField(), min_length=1)
    workers = serializers.IntegerField(default=lambda: settings.SIMULACION_WORKERS, min_value=1)
    thresholds = ThresholdsSerializer(default=Thresholds)

    def validate_m_grid(self, value):
        return _strictly_increasing(value)

    def validate_q_grid(self, value):
        return _strictly_increasing(value)


class SweepSerializer(StrictSerializer):
    sweep = SweepPlanSerializer()
    run = RunSerializer()

    def validate(self, attrs):
        plan = attrs['sweep']
        try:
            cfg = SweepConfig(template=attrs['run'], **plan)
            jobs = cfg.jobs()
        except SimulacionError as exc:
            raise serializers.ValidationError({'sweep': {'thresholds': [str(exc)]}})
        # Every point must resolve its own diagnostics defaults.
        for i, j, job in jobs:
            try:
                ResolvedDiagnostics.build(job.params, job.diagnostics)
            except (SimulacionError, ValueError) as exc:
                raise serializers.ValidationError(
                    {'sweep': [f'punto ({i}, {j}) m={job.params.m!r} q={job.params.q!r}: {exc}']})
        return cfg


def flatten_errors(detail, path=''):
    """DRF error detail to a flat list of 'path: message' strings."""
    if isinstance(detail, Mapping):
        flat = []
        for key, value in detail.items():
            if key == api_settings.NON_FIELD_ERRORS_KEY:
                flat.extend(flatten_errors(value, path))
            else:
                flat.extend(flatten_errors(value, f'{path}.{key}' if path else str(key)))
        return flat
    if isinstance(detail, (list, tuple)):
        flat = []
        for item in detail:
            flat.extend(flatten_errors(item, path))
        return flat
    return [f'{path}: {detail}' if path else str(detail)]


def parse_document(document):
    if not isinstance(document, Mapping):
        raise ConfigError(['el documento debe ser un objeto JSON'])
    serializer = SweepSerializer(data=document) if 'sweep' in document else RunSerializer(data=document)
    if not serializer.is_valid():
        raise ConfigError(flatten_errors(serializer.errors))
    return serializer.validated_data


def parse_config(text):
    """RunConfig or SweepConfig from a JSON document; ConfigError lists every field error."""
    if isinstance(text, str):
        text = text.encode('utf-8')
    try:
        document = JSONParser().parse(io.BytesIO(text))
    except ParseError as exc:
        raise ConfigError([f'JSON invalido: {exc.detail}'])
    return parse_document(document)


def _run_document(cfg):
    return _plain(RunSerializer(cfg).data)


def _plain(value):
    if isinstance(value, Mapping):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def dump_config(cfg):
    """Fully-defaulted document with parse_config(dump_config(cfg)) == cfg."""
    if isinstance(cfg, SweepConfig):
        return {
            'sweep': _plain(SweepPlanSerializer(cfg).data),
            'run': _run_document(cfg.template),
        }
    return _run_document(cfg)
