from django.core.management.base import CommandError

from construct.builders import MASS_METHODS
from construct.forms import METHODS
from construct.strata import MODES

from .forms import SAMPLERS
from .runner import ConfigError, load_config, merge_options, validate

EXPERIMENT_OPTIONS = (
    'target', 'methods', 'm', 'seeds', 's', 'sampler', 'epsilon', 'mode', 'm0',
    'masses', 'nodes', 'resolution',
)


def add_experiment_arguments(parser):
    """Flags shared by build and rate_sweep; every flag overrides the --config file."""
    parser.add_argument('--config', help='JSON experiment config; flags override its fields.')
    parser.add_argument('--target', help='Catalog name, e.g. sine-ridge:1,1 or cosine-sum:measure.json.')
    parser.add_argument('--method', dest='methods', nargs='+', choices=METHODS)
    parser.add_argument('--m', nargs='+', type=int, help='Strictly increasing term counts.')
    parser.add_argument('--seeds', nargs='+', type=int)
    parser.add_argument('--s', type=int, choices=(2, 3), help='2 for ReLU, 3 for squared ReLU.')
    parser.add_argument('--sampler', choices=SAMPLERS)
    parser.add_argument('--epsilon', type=float, help='Partition width for the stratified builder.')
    parser.add_argument('--mode', choices=MODES)
    parser.add_argument('--m0', type=int, help='Inner sparsity budget for the sparse builder.')
    parser.add_argument('--masses', choices=MASS_METHODS)
    parser.add_argument('--nodes', type=int, help='Gauss-Legendre nodes per axis for L2 errors.')
    parser.add_argument('--resolution', type=int, help='Grid points per axis for sup errors.')
    parser.add_argument('--out', help='Output directory.')
    parser.add_argument('--force', action='store_true', help='Run beyond the desk-scale limits.')


def experiment_data(options, file_options):
    overrides = {name: options.get(name) for name in EXPERIMENT_OPTIONS}
    data = merge_options(file_options, overrides)
    data['force'] = bool(options.get('force')) or bool(file_options.get('force'))
    return data


def load_experiment(form_class, options):
    """Validated ExperimentConfig from --config and flags; config problems exit with code 2."""
    if not options.get('out'):
        raise CommandError("--out is required.", returncode=2)
    try:
        file_options = load_config(options['config']) if options.get('config') else {}
        return validate(form_class, experiment_data(options, file_options))
    except ConfigError as exc:
        raise CommandError(str(exc), returncode=2) from exc
