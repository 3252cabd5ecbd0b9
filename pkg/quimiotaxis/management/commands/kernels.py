import json

from django.core.management.base import CommandError

from quimiotaxis.outputs import emit_json_report
from quimiotaxis.verification import run_kernel_checks

from ._base import JOB_FAILURE, SimulacionCommand


class Command(SimulacionCommand):
    help = 'Verificacion aleatoria de los nucleos analiticos; informe JSON de aprobado/fallo.'

    def add_arguments(self, parser):
        parser.add_argument('--out', help='Directorio donde escribir kernels.json.')
        parser.add_argument('--seed', type=int, default=0)

    def handle(self, *args, **options):
        report = run_kernel_checks(seed=options['seed'])
        self.stdout.write(json.dumps(report, indent=2, sort_keys=True))
        if options['out']:
            self.emit(emit_json_report, options['out'], 'kernels.json', report)
        if not report['passed']:
            failed = sorted(name for name, check in report['checks'].items() if not check['passed'])
            raise CommandError(f'verificaciones fallidas: {", ".join(failed)}', returncode=JOB_FAILURE)
