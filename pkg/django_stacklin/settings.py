"""
Django settings for django_stacklin project.

Only what the stacklin management command and the test runner need: no
database, no middleware, no templates.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('STACKLIN_SECRET_KEY', 'django-insecure-stacklin-local-only')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'stacklin',
]

DATABASES = {}

USE_TZ = True


# Stack linearizability checking

STACKLIN = {
    'OPTIONS': {
        'max_search_pops': 10,
        'oracle_max_ops': 12,
        'strip_elim': True,
        'pop_order': 'recorded',
        'harness_timeout': 30.0,
        'jitter': 0.1,
        'elimination_capacity': 4,
        'elimination_timeout': 0.0005,
        'fuzz_trials': 10000,
        'fuzz_max_ops': 8,
        'fuzz_workers': 1,
        'report': 'text',
    },
    'STACKS': {
        'treiber': 'stacklin.stacks.treiber.TreiberStack',
        'hsy': 'stacklin.stacks.hsy.HSYStack',
        'ts': 'stacklin.stacks.ts.TSStack',
    },
}


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'stacklin': {
            'handlers': ['console'],
            'level': os.environ.get('STACKLIN_LOG_LEVEL', 'WARNING'),
        },
    },
}
