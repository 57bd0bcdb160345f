"""
Django settings for the ridgeapprox project.

The project has no web surface: Django provides the settings layer, the
management-command CLI, form validation of experiment configs and the test
runner. Everything specific to the experiments is a ``RIDGE_*`` setting below.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Nothing is signed or served; the key only satisfies Django's startup checks.
SECRET_KEY = os.environ.get('RIDGE_SECRET_KEY', 'ridgeapprox-offline-batch-runner')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'ridge_core',
    'spectral',
    'construct',
    'metrics',
    'packing',
    'experiments',
]

# No tables: the experiments persist flat files only.
DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

RIDGE_LOG_LEVEL = os.environ.get('RIDGE_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        name: {'handlers': ['console'], 'level': RIDGE_LOG_LEVEL, 'propagate': False}
        for name in (
            'ridgeapprox', 'ridge_core', 'spectral', 'construct',
            'metrics', 'packing', 'experiments',
        )
    },
}


# Experiment defaults

RIDGE_DEFAULT_SEED = int(os.environ.get('RIDGE_SEED', '0'))

# Gauss-Legendre nodes per axis for L2(D) errors (d <= 3).
RIDGE_QUADRATURE_NODES = 64

# Sobol points for L2(D) errors when d >= 4.
RIDGE_QMC_POINTS = 2 ** 16

# Grid points per axis for sup-norm estimates, keyed by dimension.
RIDGE_LINF_RESOLUTION = {1: 1025, 2: 129, 3: 65, 4: 17}
RIDGE_LINF_RANDOM_POINTS = 10 ** 5
RIDGE_LINF_REFINE_CELLS = 10

# Points evaluated per block when evaluating combinations on large grids.
RIDGE_EVAL_CHUNK = 4096

# Stratified sampling with estimated masses.
RIDGE_MASS_DRAWS_MIN = 10 ** 4
RIDGE_RETRY_BUDGET = 10 ** 6

# Desk-scale envelope; commands refuse larger runs without --force.
RIDGE_MAX_DIM = 4
RIDGE_MAX_M = 4096
RIDGE_MAX_SEEDS = 50

# Worker threads for sweep cells.
RIDGE_WORKERS = int(os.environ.get('RIDGE_WORKERS', '1'))

# Random codewords tried by the greedy packing search.
RIDGE_PACKING_TRIALS = 10 ** 5
