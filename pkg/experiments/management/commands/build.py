from django.core.management.base import BaseCommand, CommandError

from experiments.forms import BuildForm
from experiments.options import add_experiment_arguments, load_experiment
from experiments.runner import BuilderError, run_build, write_build


class Command(BaseCommand):
    help = "Build one ridge combination and write combination.json, report.csv and manifest.json."

    def add_arguments(self, parser):
        add_experiment_arguments(parser)

    def handle(self, *args, **options):
        config = load_experiment(BuildForm, options)
        try:
            c, report = run_build(config)
        except BuilderError as exc:
            raise CommandError(str(exc), returncode=3) from exc
        write_build(options['out'], config, c, report)
        self.stdout.write(self.style.SUCCESS(
            f"{report.method} m={report.m} seed={report.seed}: l2={report.l2:.3e} "
            f"linf={report.linf:.3e} terms={report.term_count} -> {options['out']}"
        ))
