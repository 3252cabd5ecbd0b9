from pathlib import Path

from django.core.management.base import CommandError

from quimiotaxis.diagnostics import SpaceTimeSeries, build_ladder, check_decay
from quimiotaxis.exceptions import ConfigError, SimulacionError
from quimiotaxis.outputs import emit_ladder_csv, format_real, load_run_artifact
from quimiotaxis.serializers import parse_document

from ._base import CONFIG_ERROR, SimulacionCommand


class Command(SimulacionCommand):
    help = 'Reconstruye la escalera de truncamiento de una corrida guardada para un nivel K dado.'

    def add_arguments(self, parser):
        parser.add_argument('run_dir', help='Directorio escrito por el comando run.')
        parser.add_argument('--K', type=float, required=True, dest='K')
        parser.add_argument('--n-max', type=int, dest='n_max')
        parser.add_argument('--out', help='Directorio de salida (por defecto el de la corrida).')

    def handle(self, *args, **options):
        run_dir = Path(options['run_dir'])
        try:
            metadata, values = load_run_artifact(run_dir)
            cfg = parse_document(metadata['config'])
        except ConfigError as exc:
            raise CommandError(f'metadatos invalidos: {exc}', returncode=CONFIG_ERROR)
        except (SimulacionError, KeyError) as exc:
            raise CommandError(f'{run_dir} no es un artefacto de corrida: {exc}', returncode=CONFIG_ERROR)

        n_max = options['n_max'] if options['n_max'] is not None else cfg.diagnostics.n_max
        try:
            series = SpaceTimeSeries(metadata['sample_times'], values, cfg.grid.cell_volume)
            ladder = build_ladder(series, options['K'], n_max, metadata['analysis']['m_s'])
        except SimulacionError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)
        decay = check_decay(ladder)

        out = Path(options['out']) if options['out'] else run_dir
        name = f"ladder_K={format_real(options['K'])}.csv"
        path = self.emit(emit_ladder_csv, out, name, ladder)
        self.stdout.write(self.style.SUCCESS(
            f'K={ladder.K!r} monotona={decay.monotone} medidas_monotonas={decay.measures_monotone} -> {path}'))
