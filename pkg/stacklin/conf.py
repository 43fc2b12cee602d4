import copy
import logging

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from django.utils.module_loading import import_string

LOGGER = logging.getLogger(__name__)

DEFAULT_STACKS = {
    'treiber': 'stacklin.stacks.treiber.TreiberStack',
    'hsy': 'stacklin.stacks.hsy.HSYStack',
    'ts': 'stacklin.stacks.ts.TSStack',
}

REPORT_FORMATS = ('text', 'json')


class StacklinOptions:
    """Tunables read from ``settings.STACKLIN``."""

    def __init__(self, settings_dict=None):
        if settings_dict is None:
            settings_dict = getattr(settings, 'STACKLIN', {})
        self.base_settings = copy.deepcopy(settings_dict)
        if 'OPTIONS' not in self.base_settings:
            self.base_settings['OPTIONS'] = dict()
        self.max_search_pops = self.base_settings['OPTIONS'].pop('max_search_pops', 10)
        self.oracle_max_ops = self.base_settings['OPTIONS'].pop('oracle_max_ops', 12)
        self.strip_elim = self.base_settings['OPTIONS'].pop('strip_elim', True)
        self.pop_order = self.base_settings['OPTIONS'].pop('pop_order', 'recorded')
        self.harness_timeout = self.base_settings['OPTIONS'].pop('harness_timeout', 30.0)
        self.jitter = self.base_settings['OPTIONS'].pop('jitter', 0.1)
        self.elimination_capacity = self.base_settings['OPTIONS'].pop('elimination_capacity', 4)
        self.elimination_timeout = self.base_settings['OPTIONS'].pop('elimination_timeout', 0.0005)
        self.fuzz_trials = self.base_settings['OPTIONS'].pop('fuzz_trials', 10000)
        self.fuzz_max_ops = self.base_settings['OPTIONS'].pop('fuzz_max_ops', 8)
        self.fuzz_workers = self.base_settings['OPTIONS'].pop('fuzz_workers', 1)
        self.report = self.base_settings['OPTIONS'].pop('report', 'text')
        for key in sorted(self.base_settings['OPTIONS']):
            LOGGER.warning('ignoring unknown STACKLIN option %s' % key)
        self.stacks = dict(DEFAULT_STACKS)
        self.stacks.update(self.base_settings.get('STACKS', {}))
        self.validate()

    def validate(self):
        if self.pop_order not in ('recorded', 'search'):
            raise ImproperlyConfigured('STACKLIN pop_order must be recorded or search, not %r' % self.pop_order)
        if self.report not in REPORT_FORMATS:
            raise ImproperlyConfigured('STACKLIN report must be text or json, not %r' % self.report)
        if self.fuzz_max_ops > self.oracle_max_ops:
            raise ImproperlyConfigured('STACKLIN fuzz_max_ops (%d) exceeds oracle_max_ops (%d)' % (
                self.fuzz_max_ops, self.oracle_max_ops))
        for name in ('max_search_pops', 'oracle_max_ops', 'elimination_capacity', 'fuzz_max_ops', 'fuzz_workers'):
            if getattr(self, name) < 1:
                raise ImproperlyConfigured('STACKLIN %s must be positive' % name)
        if not 0 <= self.jitter <= 1:
            raise ImproperlyConfigured('STACKLIN jitter must be a probability, not %r' % self.jitter)

    def stack_class(self, impl):
        try:
            path = self.stacks[impl]
        except KeyError:
            raise ImproperlyConfigured('no stack implementation named %r, known: %s' % (
                impl, ', '.join(sorted(self.stacks))))
        return import_string(path)


def get_options():
    return StacklinOptions()
