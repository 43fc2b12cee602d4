import random
from unittest import mock

from django.test import SimpleTestCase

from stacklin import corpus
from stacklin.checker import (
    RECORDED, SEARCH, ConditionTracker, PopOrder, check, check_condition1, check_condition2, check_searching,
    pop_order_from_removals, verify,
)
from stacklin.exceptions import (
    InternalInvariantBroken, MissingRemovalRank, NotALinearExtension, PopOrderError, SearchBoundExceeded,
)
from stacklin.fuzz import synthetic_history
from stacklin.history import EMPTY, parse_history
from stacklin.matching import derive_match, validate_match
from stacklin.oracle import oracle_check
from stacklin.reduction import find_elimination_pairs, strip
from stacklin.tests.test_history import SEQUENTIAL
from stacklin.tests.test_linearizer import CONSTRUCTION_GAP, NEVER_POPPED

TWO_EMPTY = """stacklin-history v1
inv 1 t1 pop
inv 2 t2 pop
ret 1 t1 empty
ret 2 t2 empty
"""


def empty_pops(n):
    lines = ['stacklin-history v1']
    for i in range(1, n + 1):
        lines.extend(['inv %d t1 pop' % i, 'ret %d t1 empty' % i])
    return '\n'.join(lines) + '\n'


class PopOrderTestCase(SimpleTestCase):
    def test_from_removals(self):
        """Ensure pops are ordered by removal rank"""
        order = pop_order_from_removals(corpus.load('five-threads'))

        self.assertEqual(order, PopOrder(('5', '2', '6')))

    def test_missing_rank(self):
        """Ensure a pop without removal rank is reported"""
        h = parse_history(corpus.OVERLAP_X.replace('rm 3 1\n', ''))

        with self.assertRaises(MissingRemovalRank) as cm:
            pop_order_from_removals(h)
        self.assertEqual(cm.exception.pops, ('3',))

    def test_not_a_linear_extension(self):
        """Ensure ranks contradicting happened-before are reported"""
        h = parse_history(SEQUENTIAL + 'rm 4 1\nrm 3 2\n')

        with self.assertRaises(NotALinearExtension):
            pop_order_from_removals(h)

        # verify turns it into a verdict
        verdict = verify(h, pop_order=RECORDED)
        self.assertFalse(verdict.ok)
        self.assertEqual(verdict.failed_condition, 'pop-order')

    def test_check_rejects_bad_order(self):
        """Ensure check refuses orders that are not permutations of the pops"""
        h = corpus.load('five-threads')

        with self.assertRaises(PopOrderError):
            check(h, derive_match(h), PopOrder(['5', '2']))


class ConditionTestCase(SimpleTestCase):
    def test_five_threads(self):
        """Ensure every pop of the recorded order passes"""
        h = corpus.load('five-threads')
        m = derive_match(h)
        order = pop_order_from_removals(h)

        for i in range(1, 4):
            self.assertIsNone(check_condition1(h, m, order, i))

    def test_condition1(self):
        """Ensure a pop removing an older push while a newer one is present fails"""
        h = corpus.load('fifo')
        violation = check_condition1(h, derive_match(h), pop_order_from_removals(h), 1)

        self.assertEqual(violation.condition, 'condition-1')
        self.assertEqual(violation.ops, ('3', '1', '2'))
        self.assertEqual(violation.pop_index, 1)

    def test_condition2a(self):
        """Ensure an empty pop after a completed push fails"""
        h = corpus.load('empty-after-push')
        violation = check_condition2(h, derive_match(h), pop_order_from_removals(h), 1)

        self.assertEqual(violation.condition, 'condition-2a')
        self.assertEqual(violation.ops, ('2', '1'))

    def test_condition2b(self):
        """Ensure an empty pop placed after pop(a) fails while push(b) is still in"""
        h = corpus.load('cond2b')
        m = derive_match(h)
        order = pop_order_from_removals(h)

        self.assertIsNone(check_condition1(h, m, order, 1))
        violation = check_condition2(h, m, order, 2)
        self.assertEqual(violation.condition, 'condition-2b')
        self.assertEqual(violation.ops, ('1', '2', '4'))

    def test_tracker_matches_naive(self):
        """Ensure the segment tree evaluation reports exactly what the direct one does"""
        rng = random.Random(13)
        compared = 0
        for _ in range(300):
            h = synthetic_history(rng, rng.randint(1, 10))
            m = derive_match(h)
            if validate_match(h, m) is not None:
                continue
            h = strip(h, find_elimination_pairs(h, m))
            m = m.restrict(pop.op for pop in h.pops)
            order = PopOrder(pop.op for pop in h.pops)
            tracker = ConditionTracker(h, m)
            for i, pop_id in enumerate(order.pops, start=1):
                if m[pop_id] is EMPTY:
                    expected = check_condition2(h, m, order, i)
                else:
                    expected = check_condition1(h, m, order, i)
                self.assertEqual(tracker.advance(pop_id), expected)
                compared += 1
                if expected is not None:
                    break
        self.assertGreater(compared, 100)


class CheckTestCase(SimpleTestCase):
    def test_five_threads(self):
        """Ensure the recorded order yields the expected witness"""
        h = corpus.load('five-threads')
        verdict = check(h, derive_match(h), pop_order_from_removals(h))

        self.assertTrue(verdict.ok)
        self.assertEqual(verdict.witness_ids, ('1', '2', '3', '4', '5', '6'))

    def test_construction_gap(self):
        """Ensure an order passing both conditions without direct witness falls back to scheduling"""
        h = parse_history(CONSTRUCTION_GAP)

        verdict = check(h, derive_match(h), pop_order_from_removals(h))

        self.assertTrue(verdict.ok)
        self.assertEqual(verdict.witness_ids, ('3', '2', '1', '4'))
        self.assertEqual(len(verdict.warnings), 1)
        self.assertIn('no quiet gap', verdict.warnings[0])

    def test_never_popped(self):
        """Ensure pushes nobody pops do not break the witness"""
        h = parse_history(NEVER_POPPED)

        verdict = check(h, derive_match(h), PopOrder(['5', '6']))

        self.assertTrue(verdict.ok)
        self.assertEqual(verdict.witness_ids, ('1', '2', '4', '5', '6', '3'))
        self.assertEqual(verdict.warnings, ())

    def test_search_bound(self):
        """Ensure the search refuses too many pops"""
        h = parse_history(empty_pops(11))

        with self.assertRaises(SearchBoundExceeded):
            check_searching(h, derive_match(h))
        self.assertTrue(check_searching(h, derive_match(h), max_pops=11).ok)

    @mock.patch('stacklin.checker.linearize', side_effect=InternalInvariantBroken('boom'))
    def test_construction_failure_scheduled(self, linearize):
        """Ensure the search warns about an order without direct witness and schedules one"""
        verdict = verify(parse_history(TWO_EMPTY), pop_order=SEARCH)

        self.assertTrue(verdict.ok)
        self.assertEqual(verdict.witness_ids, ('1', '2'))
        self.assertEqual(len(verdict.warnings), 1)
        self.assertIn('boom', verdict.warnings[0])
        linearize.assert_called_once()

    @mock.patch('stacklin.checker.schedule_witness', return_value=None)
    @mock.patch('stacklin.checker.linearize', side_effect=InternalInvariantBroken('boom'))
    def test_construction_failure_everywhere(self, linearize, schedule_witness):
        """Ensure a construction verdict when no sequence realizes the match"""
        verdict = verify(corpus.load('overlap-x'), pop_order=SEARCH)

        self.assertFalse(verdict.ok)
        self.assertEqual(verdict.failed_condition, 'construction')
        self.assertEqual(len(verdict.warnings), 1)
        schedule_witness.assert_called_once()


class VerifyTestCase(SimpleTestCase):
    def test_corpus_recorded(self):
        """Ensure the recorded order verdicts of the examples"""
        expected = {
            'overlap-x': (True, None),
            'overlap-y': (True, None),
            'five-threads': (True, None),
            'reorder': (False, 'condition-1'),
            'fifo': (False, 'condition-1'),
            'empty-after-push': (False, 'condition-2a'),
            'cond2b': (False, 'condition-2b'),
            'unpushed': (False, 'clause-1'),
        }
        for name, (ok, condition) in expected.items():
            with self.subTest(name=name):
                verdict = verify(corpus.load(name), pop_order=RECORDED)
                self.assertEqual(verdict.ok, ok)
                self.assertEqual(verdict.failed_condition, condition)

    def test_corpus_search(self):
        """Ensure searching agrees with the oracle on every example"""
        for name in corpus.names():
            with self.subTest(name=name):
                h = corpus.load(name)
                self.assertEqual(verify(h).ok, oracle_check(h).ok)

    def test_witnesses(self):
        """Ensure the witnesses of the small examples"""
        self.assertEqual(verify(corpus.load('overlap-x')).witness_ids, ('1', '3', '2'))
        self.assertEqual(verify(corpus.load('overlap-y')).witness_ids, ('1', '2', '3'))
        self.assertEqual(verify(corpus.load('overlap-y'), pop_order=RECORDED).witness_ids, ('1', '2', '3'))
        self.assertEqual(verify(corpus.load('reorder')).witness_ids, ('1', '2', '4', '3'))
        self.assertEqual(verify(corpus.load('cond2b')).witness_ids, ('1', '2', '3', '4'))

    def test_violation_details(self):
        """Ensure a violation names the pop and the operations involved"""
        verdict = verify(corpus.load('fifo'))

        self.assertEqual(verdict.as_dict(), {
            'result': 'VIOLATION',
            'failed_condition': 'condition-1',
            'pop_index': 1,
            'ops': ['3', '1', '2'],
            'reason': '3 removes 1 although 2 was pushed later',
            'witness': [],
            'warnings': [],
        })

    def test_unpushed(self):
        """Ensure a pop of a value never pushed fails the mapping"""
        verdict = verify(corpus.load('unpushed'))

        self.assertEqual(verdict.failed_condition, 'clause-1')
        self.assertEqual(verdict.violation.ops, ('2',))

    def test_keep_elimination_pairs(self):
        """Ensure the conditions fail when elimination pairs are not stripped"""
        verdict = verify(corpus.load('overlap-y'), strip_elim=False)

        self.assertFalse(verdict.ok)
        self.assertEqual(verdict.failed_condition, 'condition-1')

    def test_construction_gap(self):
        """Ensure the search finds a witness where the recorded order cannot"""
        h = parse_history(CONSTRUCTION_GAP)

        verdict = verify(h)

        self.assertTrue(verdict.ok)
        self.assertEqual(verdict.witness_ids, ('3', '2', '1', '4'))
        self.assertEqual(verdict.warnings, ())

        recorded = verify(h, pop_order=RECORDED)
        self.assertTrue(recorded.ok)
        self.assertEqual(recorded.witness_ids, ('3', '2', '1', '4'))
        self.assertEqual(len(recorded.warnings), 1)

    def test_never_popped(self):
        """Ensure a history leaving pushes on the stack is accepted, as the oracle does"""
        h = parse_history(NEVER_POPPED)
        recorded = parse_history(NEVER_POPPED + 'rm 5 1\nrm 6 2\n')

        for verdict in (verify(h), verify(recorded, pop_order=RECORDED)):
            self.assertTrue(verdict.ok, verdict.violation)
            self.assertEqual(verdict.witness_ids, ('1', '2', '4', '5', '6', '3'))
        self.assertEqual(verify(h).ok, oracle_check(h).ok)

    def test_logs_verdict(self):
        """Ensure every verdict is logged once at info"""
        with self.assertLogs('stacklin.checker', 'INFO') as cm:
            verify(corpus.load('fifo'))
        self.assertEqual(len([line for line in cm.output if 'history rejected' in line]), 1)

        with self.assertLogs('stacklin.checker', 'INFO') as cm:
            verify(corpus.load('fifo'), pop_order=RECORDED)
        self.assertEqual(len([line for line in cm.output if 'history rejected' in line]), 1)

        with self.assertLogs('stacklin.checker', 'INFO') as cm:
            verify(corpus.load('five-threads'))
        self.assertIn('history linearizable', cm.output[-1])

    def test_pending_warning(self):
        """Ensure parse warnings are carried into the verdict"""
        h = parse_history(corpus.OVERLAP_X.replace('rm 3 1\n', 'inv 9 t9 pop\n'))

        verdict = verify(h)

        self.assertTrue(verdict.ok)
        self.assertEqual(len(verdict.warnings), 1)

    def test_unknown_pop_order(self):
        """Ensure an unknown pop order source is refused"""
        with self.assertRaises(ValueError):
            verify(corpus.load('five-threads'), pop_order='oldest')
