import random
import tempfile
from pathlib import Path
from unittest import mock

from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase

from stacklin import corpus
from stacklin.bench import SKIPPED, bench, write_table
from stacklin.checker import verify
from stacklin.fuzz import (
    FuzzConfig, FuzzReport, _layouts, exhaustive_histories, fifo_inject, fuzz, rank_shuffle, synthetic_history,
    value_swap,
)
from stacklin.exceptions import InternalInvariantBroken
from stacklin.history import emit_history, parse_history
from stacklin.oracle import oracle_check
from stacklin.verdicts import LINEARIZABLE, Verdict


class GeneratorTestCase(SimpleTestCase):
    def test_layouts(self):
        """Ensure layouts are counted by the odd double factorial"""
        self.assertEqual([len(list(_layouts(n))) for n in range(1, 5)], [1, 3, 15, 105])

    def test_exhaustive_histories(self):
        """Ensure every assignment of methods and results is generated"""
        self.assertEqual(len(list(exhaustive_histories(1))), 2)
        self.assertEqual(len(list(exhaustive_histories(2))), 18)

    def test_synthetic_linearizable(self):
        """Ensure histories replayed from a stack are linearizable"""
        rng = random.Random(4)
        for _ in range(50):
            h = synthetic_history(rng, rng.randint(1, 8), linearizable=True)
            self.assertTrue(oracle_check(h).ok)

    def test_fifo_inject(self):
        """Ensure an injected queue behaviour is rejected by both deciders"""
        mutant = fifo_inject(corpus.load('five-threads'))

        self.assertEqual(len(mutant), 9)
        self.assertFalse(oracle_check(mutant).ok)
        self.assertEqual(verify(mutant, pop_order='recorded').failed_condition, 'condition-1')
        self.assertFalse(verify(mutant).ok)

    def test_value_swap(self):
        """Ensure a swap exchanges two pop results"""
        h = corpus.load('five-threads')
        mutant = value_swap(h, random.Random(0))

        self.assertEqual(sorted(pop.value for pop in mutant.pops), sorted(pop.value for pop in h.pops))
        self.assertNotEqual([pop.value for pop in mutant.pops], [pop.value for pop in h.pops])

    def test_rank_shuffle(self):
        """Ensure a shuffle keeps the set of ranks"""
        h = corpus.load('five-threads')
        mutant = rank_shuffle(h, random.Random(0))

        self.assertEqual(sorted(mutant.removal_order.values()), [1, 2, 3])
        self.assertIsNone(rank_shuffle(corpus.load('fifo'), random.Random(0)))


class FuzzTestCase(SimpleTestCase):
    def test_no_trials(self):
        """Ensure an empty campaign reports nothing"""
        report = fuzz(FuzzConfig(trials=0))

        self.assertEqual(report.as_dict(), FuzzReport().as_dict())

    def test_invalid(self):
        """Ensure campaign bounds are validated"""
        for config in (FuzzConfig(max_ops=13), FuzzConfig(max_ops=11), FuzzConfig(workers=0),
                       FuzzConfig(exhaustive=5)):
            with self.subTest(config=config):
                with self.assertRaises(ImproperlyConfigured):
                    fuzz(config)

    def test_exhaustive(self):
        """Ensure the checker agrees with the oracle on every layout of up to four operations"""
        report = fuzz(FuzzConfig(trials=0, exhaustive=4))

        self.assertEqual(report.trials, 2 + 18 + 345 + 10920)
        self.assertEqual(report.disagreements, [])
        self.assertEqual(report.agreements, report.trials)

    def test_random(self):
        """Ensure random trials and their mutants raise no disagreement"""
        report = fuzz(FuzzConfig(trials=300, max_ops=8, seed=1, mutate=True))

        self.assertEqual(report.trials, 300)
        self.assertEqual(report.disagreements, [])
        self.assertEqual(report.errors, [])
        self.assertEqual(report.false_accepts, 0)
        self.assertGreater(report.mutants, 0)
        self.assertGreater(sum(report.violations.values()), 0)

    def test_random_seeds(self):
        """Ensure larger random trials agree with the oracle across seeds"""
        for seed in range(2, 6):
            with self.subTest(seed=seed):
                report = fuzz(FuzzConfig(trials=100, max_ops=8, seed=seed, mutate=True))

                self.assertEqual(report.disagreements, [])
                self.assertEqual(report.errors, [])
                self.assertEqual(report.agreements, report.trials)

    def test_workers(self):
        """Ensure a worker pool reports the same counts as a single worker"""
        single = fuzz(FuzzConfig(trials=40, seed=2))
        pooled = fuzz(FuzzConfig(trials=40, seed=2, workers=4))

        self.assertEqual(pooled.trials, single.trials)
        self.assertEqual(pooled.agreements, single.agreements)
        self.assertEqual(pooled.violations, single.violations)

    @mock.patch('stacklin.fuzz.verify', return_value=Verdict(LINEARIZABLE))
    def test_disagreement_persisted(self, verify):
        """Ensure a disagreement is written out as a history file"""
        with tempfile.TemporaryDirectory() as out_dir:
            report = fuzz(FuzzConfig(trials=0, exhaustive=2, out_dir=out_dir))

            self.assertGreater(len(report.disagreements), 0)
            for path in report.disagreements:
                self.assertTrue(path.endswith('.hist'))
                self.assertFalse(oracle_check(parse_history(Path(path).read_text())).ok)


    @mock.patch('stacklin.fuzz.verify', side_effect=InternalInvariantBroken('boom'))
    def test_errors_persisted(self, verify):
        """Ensure a history the checker fails on is counted and written out"""
        with tempfile.TemporaryDirectory() as out_dir:
            report = fuzz(FuzzConfig(trials=3, max_ops=4, seed=3, mutate=True, out_dir=out_dir))

            self.assertEqual(report.trials, 3)
            self.assertEqual(report.agreements, 0)
            self.assertGreaterEqual(len(report.errors), 3)
            self.assertEqual(report.mutants, len(report.errors) - 3)
            for path in report.errors:
                self.assertTrue(Path(path).exists())
        self.assertEqual(report.as_dict()['errors'], sorted(report.errors))


class BenchTestCase(SimpleTestCase):
    def test_bench(self):
        """Ensure each size gets a row and the oracle is skipped past its bound"""
        rows = bench('treiber', [4, 14], threads=2)

        self.assertEqual([row.operations for row in rows], [4, 14])
        self.assertEqual([row.result for row in rows], [LINEARIZABLE, LINEARIZABLE])
        self.assertIsNotNone(rows[0].oracle_seconds)
        self.assertEqual(rows[1].as_row()[3], SKIPPED)

    def test_sizes_ascending(self):
        """Ensure descending sizes are refused"""
        with self.assertRaises(ValueError):
            bench('treiber', [8, 4])

    def test_write_table(self):
        """Ensure the table is CSV with a header"""
        rows = bench('ts', [4])
        with tempfile.TemporaryFile('w+') as stream:
            write_table(rows, stream)
            stream.seek(0)
            lines = stream.read().splitlines()

        self.assertEqual(lines[0], 'size,operations,checker_seconds,oracle_seconds,result')
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[1].startswith('4,4,'))


class EmitCorpusTestCase(SimpleTestCase):
    def test_corpus_round_trip(self):
        """Ensure every bundled example is in canonical form"""
        for name in corpus.names():
            with self.subTest(name=name):
                self.assertEqual(emit_history(corpus.load(name)), corpus.CORPUS[name])
