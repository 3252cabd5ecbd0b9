"""Shared plumbing of the simulation commands."""

from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from quimiotaxis.exceptions import ConfigError, OutputError
from quimiotaxis.serializers import parse_config

CONFIG_ERROR = 1
JOB_FAILURE = 2


class SimulacionCommand(BaseCommand):

    def add_output_arguments(self, parser):
        parser.add_argument('--out', help='Directorio de salida (por defecto SIMULACION_OUTPUT_DIR/<config>).')
        parser.add_argument('--seed', type=int, help='Sobrescribe la semilla de la configuracion.')

    def load_config(self, path, expected):
        try:
            text = Path(path).read_text(encoding='utf-8')
        except OSError as exc:
            raise CommandError(f'no se puede leer {path}: {exc}', returncode=CONFIG_ERROR)
        try:
            cfg = parse_config(text)
        except ConfigError as exc:
            for error in exc.errors:
                self.stderr.write(error)
            raise CommandError(f'configuracion invalida ({len(exc.errors)} errores)',
                               returncode=CONFIG_ERROR)
        if not isinstance(cfg, expected):
            raise CommandError(f'{path} no es una configuracion de tipo {expected.__name__}',
                               returncode=CONFIG_ERROR)
        return cfg

    def output_dir(self, options, config_path):
        if options.get('out'):
            return Path(options['out'])
        return Path(settings.SIMULACION_OUTPUT_DIR) / Path(config_path).stem

    def emit(self, writer, *args):
        try:
            return writer(*args)
        except OutputError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)
