import dataclasses

from django.core.management.base import CommandError

from quimiotaxis.config import SweepConfig
from quimiotaxis.outputs import emit_sweep_outputs
from quimiotaxis.serializers import dump_config
from quimiotaxis.sweep import run_sweep

from ._base import JOB_FAILURE, SimulacionCommand


class Command(SimulacionCommand):
    help = 'Barrido del diagrama de fases (m, q) con clasificacion Bounded/BlowUp/Inconclusive.'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Ruta del documento de barrido.')
        parser.add_argument('--workers', type=int, help='Numero de procesos (por defecto el del documento).')
        self.add_output_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.load_config(options['config'], SweepConfig)
        if options['seed'] is not None:
            cfg = dataclasses.replace(cfg, template=cfg.template.with_seed(options['seed']))
        if options['workers'] is not None and options['workers'] < 1:
            raise CommandError('--workers debe ser al menos 1')

        result = run_sweep(cfg, workers=options['workers'])
        point_documents = {(i, j): dump_config(job) for i, j, job in cfg.jobs()}
        out = self.emit(emit_sweep_outputs, self.output_dir(options, options['config']),
                        result, dump_config(cfg), point_documents)

        for point in result.points:
            self.stdout.write(f'm={point.m!r} q={point.q!r} {point.regime} -> {point.classification}')
        if result.failures:
            raise CommandError(f'{len(result.failures)} puntos fallaron (ver {out})',
                               returncode=JOB_FAILURE)
        self.stdout.write(self.style.SUCCESS(f'{len(result.points)} puntos -> {out}'))
