from django.core.management.base import BaseCommand

from spectral.catalog import BUILTIN_NAMES, COSINE_SUM, resolve_target
from spectral.sampling import v_fs


class Command(BaseCommand):
    help = "List the built-in targets with their dimension and spectral norms."

    def handle(self, *args, **options):
        for name in BUILTIN_NAMES:
            measure = resolve_target(name).measure
            self.stdout.write(
                f"{name:<16} d={measure.d} atoms={len(measure)} "
                f"v2={v_fs(measure, 2):.6g} v3={v_fs(measure, 3):.6g}"
            )
        pattern = f"{COSINE_SUM}:<path>"
        self.stdout.write(f"{pattern:<16} spectral measure JSON {{dim, atoms: [{{omega, mag, phase}}]}}")
        self.stdout.write("sine-ridge:<theta> for any positive integer theta, e.g. sine-ridge:2,1")
