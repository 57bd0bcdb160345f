from django.core.management.base import BaseCommand, CommandError

from experiments.forms import SweepForm
from experiments.options import add_experiment_arguments, load_experiment
from experiments.runner import run_sweep, write_sweep


class Command(BaseCommand):
    help = "Run every (method, m, seed) cell and write results.csv, means.csv, fits.json and manifest.json."

    def add_arguments(self, parser):
        add_experiment_arguments(parser)
        parser.add_argument('--workers', type=int, help='Worker threads; defaults to RIDGE_WORKERS.')

    def handle(self, *args, **options):
        config = load_experiment(SweepForm, options)
        result = run_sweep(config, workers=options.get('workers'))
        write_sweep(options['out'], result)
        if result.failed == len(result.rows):
            raise CommandError(f"All {len(result.rows)} sweep cells failed.", returncode=3)
        for method, fits in result.fits.items():
            slopes = ' '.join(
                f"{norm}={'n/a' if fit is None else format(fit.slope, '.3f')}" for norm, fit in fits.items()
            )
            self.stdout.write(f"{method}: slope {slopes}")
        if result.failed:
            self.stderr.write(self.style.WARNING(f"{result.failed} of {len(result.rows)} cells failed."))
        if result.below_floor:
            self.stderr.write(self.style.WARNING(f"{result.below_floor} rows fall below the lower-bound floor."))
        self.stdout.write(self.style.SUCCESS(f"{len(result.rows)} rows -> {options['out']}"))
