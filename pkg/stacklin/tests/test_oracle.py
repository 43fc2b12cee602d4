import random

from django.test import SimpleTestCase

from stacklin import corpus
from stacklin.exceptions import SearchBoundExceeded
from stacklin.fuzz import exhaustive_histories, synthetic_history
from stacklin.history import happened_before, is_linear_extension, parse_history
from stacklin.oracle import SeqStackState, is_legal_sequential, oracle_check
from stacklin.tests.test_history import SEQUENTIAL


class SequentialStackTestCase(SimpleTestCase):
    def test_legal(self):
        """Ensure LIFO replay accepts stack behaviour and refuses FIFO"""
        h = parse_history(SEQUENTIAL)
        push_a, push_b, pop_b, pop_a = h.ops

        self.assertTrue(is_legal_sequential([push_a, push_b, pop_b, pop_a]))
        self.assertFalse(is_legal_sequential([push_a, push_b, pop_a]))
        self.assertTrue(is_legal_sequential([]))

    def test_empty_pop(self):
        """Ensure an empty pop is legal only on an empty stack"""
        h = corpus.load('empty-after-push')
        push, pop = h.ops

        self.assertTrue(is_legal_sequential([pop, push]))
        self.assertFalse(is_legal_sequential([push, pop]))

    def test_state(self):
        """Ensure the state keeps the top of stack last"""
        h = parse_history(SEQUENTIAL)
        state = SeqStackState()
        state.apply(h.op('1'))
        state.apply(h.op('2'))

        self.assertEqual(state.contents, ['a', 'b'])


class OracleTestCase(SimpleTestCase):
    def test_corpus(self):
        """Ensure the oracle accepts the examples and rejects the broken ones"""
        expected = {
            'overlap-x': True,
            'overlap-y': True,
            'five-threads': True,
            'reorder': True,
            'cond2b': True,
            'fifo': False,
            'empty-after-push': False,
            'unpushed': False,
        }
        for name, ok in expected.items():
            with self.subTest(name=name):
                verdict = oracle_check(corpus.load(name))
                self.assertEqual(verdict.ok, ok)

    def test_witness(self):
        """Ensure the witness is legal and preserves happened-before"""
        h = corpus.load('five-threads')
        verdict = oracle_check(h)

        self.assertEqual(len(verdict.witness), len(h))
        self.assertTrue(is_legal_sequential(verdict.witness))
        self.assertTrue(is_linear_extension(verdict.witness, happened_before(h)))

    def test_violation(self):
        """Ensure a rejection names the oracle"""
        verdict = oracle_check(corpus.load('fifo'))

        self.assertEqual(verdict.failed_condition, 'oracle')
        self.assertEqual(verdict.witness, ())

    def test_bound(self):
        """Ensure histories over the bound are refused"""
        h = synthetic_history(random.Random(1), 13)

        with self.assertRaises(SearchBoundExceeded):
            oracle_check(h)

    def test_pruning_sound(self):
        """Ensure pruned and unpruned search agree"""
        for n in range(1, 4):
            for h in exhaustive_histories(n):
                self.assertEqual(oracle_check(h).ok, oracle_check(h, prune=False).ok)

        rng = random.Random(2)
        for _ in range(200):
            h = synthetic_history(rng, rng.randint(4, 6))
            self.assertEqual(oracle_check(h).ok, oracle_check(h, prune=False).ok, h)
