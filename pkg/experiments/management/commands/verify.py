import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from experiments.checks import SUITES


class Command(BaseCommand):
    help = "Run a verification suite and print a JSON report of {check, value, tolerance, pass}."

    def add_arguments(self, parser):
        parser.add_argument('which', choices=sorted(SUITES) + ['all'])
        parser.add_argument('--seed', type=int, help='Defaults to RIDGE_DEFAULT_SEED.')
        parser.add_argument('--out', help='Directory for verify.json.')

    def handle(self, *args, **options):
        seed = settings.RIDGE_DEFAULT_SEED if options.get('seed') is None else options['seed']
        names = sorted(SUITES) if options['which'] == 'all' else [options['which']]
        checks = [check for name in names for check in SUITES[name](seed)]
        report = json.dumps([check.to_dict() for check in checks], indent=2)
        if options.get('out'):
            out = Path(options['out'])
            out.mkdir(parents=True, exist_ok=True)
            (out / 'verify.json').write_text(report + '\n')
        self.stdout.write(report)
        failed = [check.name for check in checks if not check.passed]
        if failed:
            raise CommandError(f"Failed checks: {', '.join(failed)}", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"{len(checks)} checks passed."))
