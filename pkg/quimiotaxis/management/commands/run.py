from django.core.management.base import CommandError

from quimiotaxis.config import RunConfig
from quimiotaxis.exceptions import SimulacionError
from quimiotaxis.outputs import emit_run_outputs
from quimiotaxis.serializers import dump_config
from quimiotaxis.sweep import execute_run

from ._base import JOB_FAILURE, SimulacionCommand


class Command(SimulacionCommand):
    help = 'Ejecuta una simulacion descrita por un documento JSON y escribe CSV, metadatos y escalera.'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Ruta del documento de configuracion.')
        self.add_output_arguments(parser)

    def handle(self, *args, **options):
        cfg = self.load_config(options['config'], RunConfig)
        if options['seed'] is not None:
            cfg = cfg.with_seed(options['seed'])

        try:
            artifacts = execute_run(cfg)
        except SimulacionError as exc:
            raise CommandError(f'la simulacion fallo: {exc}', returncode=JOB_FAILURE)

        out = self.emit(emit_run_outputs, self.output_dir(options, options['config']),
                        artifacts, dump_config(cfg))
        self.stdout.write(self.style.SUCCESS(
            f'{artifacts.verdict.classification.value} ({artifacts.termination.value}) '
            f't={artifacts.t_end!r} pasos={artifacts.steps} -> {out}'))
