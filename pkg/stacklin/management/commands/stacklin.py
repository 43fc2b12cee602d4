import json
import logging
import sys
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from django.core.management.base import BaseCommand, CommandError

from stacklin import corpus
from stacklin.bench import COLUMNS, bench, write_table
from stacklin.checker import POP_ORDERS, verify
from stacklin.conf import REPORT_FORMATS, get_options
from stacklin.exceptions import InternalInvariantBroken, StacklinError
from stacklin.fuzz import FuzzConfig, fuzz
from stacklin.history import emit_history, parse_history
from stacklin.oracle import oracle_check
from stacklin.stacks.harness import record_stress

LOGGER = logging.getLogger(__name__)

VIOLATION_EXIT = 1
USAGE_EXIT = 2
INTERNAL_EXIT = 3


class Command(BaseCommand):
    help = 'Record, check and fuzz concurrent stack histories.'

    def add_arguments(self, parser):
        options = get_options()
        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        def subcommand(name, help):
            sub = subparsers.add_parser(name, help=help)
            sub.add_argument('--seed', type=int, default=0)
            sub.add_argument('--report', choices=REPORT_FORMATS, default=options.report)
            sub.add_argument('--out', default=None)
            return sub

        record = subcommand('record', 'run a stack under stress and write its history')
        record.add_argument('--impl', choices=sorted(options.stacks), default='ts')
        record.add_argument('--threads', type=int, default=4)
        record.add_argument('--ops', type=int, default=250)
        record.add_argument('--pop-ratio', type=float, default=0.5)
        record.add_argument('--timeout', type=float, default=options.harness_timeout)
        record.add_argument('--jitter', type=float, default=options.jitter)

        check = subcommand('check', 'decide linearizability of a history file')
        check.add_argument('file')
        check.add_argument('--pop-order', choices=POP_ORDERS, default=options.pop_order)
        check.add_argument('--strip-elim', dest='strip_elim', action='store_true', default=options.strip_elim)
        check.add_argument('--no-strip-elim', dest='strip_elim', action='store_false')
        check.add_argument('--max-search-pops', type=int, default=options.max_search_pops)

        oracle = subcommand('oracle', 'decide linearizability by exhaustive search')
        oracle.add_argument('file')
        oracle.add_argument('--max-ops', type=int, default=options.oracle_max_ops)

        lin = subcommand('lin', 'print a linearization of a history file')
        lin.add_argument('file')
        lin.add_argument('--pop-order', choices=POP_ORDERS, default=options.pop_order)
        lin.add_argument('--max-search-pops', type=int, default=options.max_search_pops)

        campaign = subcommand('fuzz', 'compare the checker with the oracle on random histories')
        campaign.add_argument('--trials', type=int, default=options.fuzz_trials)
        campaign.add_argument('--max-ops', type=int, default=options.fuzz_max_ops)
        campaign.add_argument('--mutate', action='store_true')
        campaign.add_argument('--workers', type=int, default=options.fuzz_workers)
        campaign.add_argument('--exhaustive', type=int, default=0)

        timing = subcommand('bench', 'time the checker against the oracle')
        timing.add_argument('--impl', choices=sorted(options.stacks), default='ts')
        timing.add_argument('--sizes', type=int, nargs='+', default=[4, 8, 12])
        timing.add_argument('--threads', type=int, default=2)

        examples = subcommand('corpus', 'write one of the bundled example histories')
        examples.add_argument('--name', choices=corpus.names())
        examples.add_argument('--list', action='store_true')

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        try:
            getattr(self, 'handle_%s' % subcommand)(options)
        except CommandError:
            raise
        except InternalInvariantBroken as e:
            LOGGER.error('internal invariant broken: %s' % e)
            raise CommandError('internal invariant broken: %s' % e, returncode=INTERNAL_EXIT)
        except (StacklinError, ImproperlyConfigured, OSError, ValueError) as e:
            raise CommandError(str(e), returncode=USAGE_EXIT)

    def read_history(self, path):
        if path == '-':
            return parse_history(sys.stdin.read())
        return parse_history(Path(path).read_text())

    def write(self, options, text):
        if options['out']:
            Path(options['out']).write_text(text)
        else:
            self.stdout.write(text, ending='')

    def report_verdict(self, options, verdict):
        if options['report'] == 'json':
            self.write(options, json.dumps(verdict.as_dict(), indent=2) + '\n')
        else:
            lines = [verdict.result]
            if verdict.ok:
                lines.append('witness: %s' % ' '.join(verdict.witness_ids))
            else:
                violation = verdict.violation
                at = ' (pop %d)' % violation.pop_index if violation.pop_index else ''
                lines.append('%s%s: %s' % (violation.condition, at, violation.reason))
                if violation.ops:
                    lines.append('ops: %s' % ' '.join(violation.ops))
            lines.extend('warning: %s' % warning for warning in verdict.warnings)
            self.write(options, '\n'.join(lines) + '\n')
        if not verdict.ok:
            raise CommandError('history is not linearizable (%s)' % verdict.failed_condition,
                               returncode=VIOLATION_EXIT)

    def handle_record(self, options):
        h = record_stress(
            options['impl'], options['threads'], options['ops'], seed=options['seed'],
            pop_ratio=options['pop_ratio'], timeout=options['timeout'], jitter=options['jitter'],
        )
        self.write(options, emit_history(h))

    def handle_check(self, options):
        h = self.read_history(options['file'])
        verdict = verify(h, pop_order=options['pop_order'], strip_elim=options['strip_elim'],
                         max_search_pops=options['max_search_pops'])
        self.report_verdict(options, verdict)

    def handle_oracle(self, options):
        h = self.read_history(options['file'])
        self.report_verdict(options, oracle_check(h, max_ops=options['max_ops']))

    def handle_lin(self, options):
        h = self.read_history(options['file'])
        verdict = verify(h, pop_order=options['pop_order'], max_search_pops=options['max_search_pops'])
        if verdict.ok and options['report'] == 'text':
            self.write(options, ''.join('%s\n' % op for op in verdict.witness_ids))
        else:
            self.report_verdict(options, verdict)

    def handle_fuzz(self, options):
        settings = get_options()
        config = FuzzConfig(
            trials=options['trials'], max_ops=options['max_ops'], seed=options['seed'], mutate=options['mutate'],
            workers=options['workers'], exhaustive=options['exhaustive'], out_dir=options['out'],
            oracle_max_ops=settings.oracle_max_ops, max_search_pops=settings.max_search_pops, options=settings,
        )
        report = fuzz(config)
        if options['report'] == 'json':
            self.stdout.write(json.dumps(report.as_dict(), indent=2))
        else:
            self.stdout.write('trials: %d' % report.trials)
            self.stdout.write('agreements: %d' % report.agreements)
            self.stdout.write('disagreements: %d' % len(report.disagreements))
            for path in report.disagreements:
                self.stdout.write('  %s' % path)
            self.stdout.write('errors: %d' % len(report.errors))
            for path in report.errors:
                self.stdout.write('  %s' % path)
            for condition, count in sorted(report.violations.items()):
                self.stdout.write('violations %s: %d' % (condition, count))
            if config.mutate:
                self.stdout.write('mutants: %d, oracle rejections: %d, checker rejections: %d, false accepts: %d' % (
                    report.mutants, report.oracle_rejections, report.checker_rejections, report.false_accepts))
        if report.disagreements or report.errors:
            raise CommandError('%d disagreements with the oracle, %d checker errors' % (
                len(report.disagreements), len(report.errors)), returncode=VIOLATION_EXIT)

    def handle_bench(self, options):
        settings = get_options()
        rows = bench(options['impl'], options['sizes'], seed=options['seed'], threads=options['threads'],
                     oracle_max_ops=settings.oracle_max_ops, options=settings)
        if options['report'] == 'json':
            self.write(options, json.dumps([dict(zip(COLUMNS, row.as_row())) for row in rows], indent=2) + '\n')
        elif options['out']:
            with open(options['out'], 'w', newline='') as stream:
                write_table(rows, stream)
        else:
            write_table(rows, self.stdout)

    def handle_corpus(self, options):
        if options['list'] or not options['name']:
            self.stdout.write('\n'.join(corpus.names()))
            return
        self.write(options, corpus.CORPUS[options['name']])
