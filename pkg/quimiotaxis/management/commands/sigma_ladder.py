from django.core.management.base import CommandError

from quimiotaxis.config import RunConfig
from quimiotaxis.exceptions import SimulacionError
from quimiotaxis.outputs import emit_json_report, versions
from quimiotaxis.serializers import dump_config
from quimiotaxis.sweep import DEFAULT_SIGMAS, run_sigma_ladder

from ._base import CONFIG_ERROR, JOB_FAILURE, SimulacionCommand


class Command(SimulacionCommand):
    help = 'Repite una corrida para una lista de valores de sigma (estudio empirico sigma -> 0).'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Ruta del documento de configuracion de una corrida.')
        parser.add_argument('--sigmas', type=float, nargs='+', default=list(DEFAULT_SIGMAS))
        parser.add_argument('--workers', type=int, default=1)
        self.add_output_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.load_config(options['config'], RunConfig)
        if options['seed'] is not None:
            cfg = cfg.with_seed(options['seed'])
        sigmas = tuple(options['sigmas'])
        try:
            for sigma in sigmas:
                cfg.with_sigma(sigma)
        except SimulacionError as exc:
            raise CommandError(f'--sigmas: {exc}', returncode=CONFIG_ERROR)

        summaries = run_sigma_ladder(cfg, sigmas=sigmas, workers=options['workers'])
        path = self.emit(emit_json_report, self.output_dir(options, options['config']),
                         'sigma_ladder.json',
                         {'config': dump_config(cfg), 'versions': versions(), 'runs': summaries})

        for entry in summaries:
            self.stdout.write(f"sigma={entry['sigma']!r} -> {entry.get('classification', entry['error'])}")
        failed = [entry for entry in summaries if entry['error'] is not None]
        if failed:
            raise CommandError(f'{len(failed)} corridas fallaron (ver {path})', returncode=JOB_FAILURE)
        self.stdout.write(self.style.SUCCESS(f'{len(summaries)} corridas -> {path}'))
