import logging
import math
from bisect import bisect_left

from stacklin.exceptions import (
    InternalInvariantBroken, MissingRemovalRank, NotALinearExtension, PopOrderError, SearchBoundExceeded,
    UnmatchedPopValue,
)
from stacklin.history import EMPTY, PopOrder, happened_before
from stacklin.linearizer import (
    WitnessSequence, certify, linearize, reinsert_elimination_pairs, schedule_witness,
)
from stacklin.matching import derive_match, validate_match
from stacklin.reduction import corroborate, find_elimination_pairs, strip
from stacklin.structures import SegmentTree
from stacklin.verdicts import Verdict, Violation

LOGGER = logging.getLogger(__name__)

DEFAULT_MAX_SEARCH_POPS = 10

RECORDED = 'recorded'
SEARCH = 'search'
POP_ORDERS = (RECORDED, SEARCH)

__all__ = [
    'PopOrder', 'pop_order_from_removals', 'check_condition1', 'check_condition2', 'check',
    'check_searching', 'verify',
]


def pop_order_from_removals(h):
    missing = [pop.op for pop in h.pops if pop.op not in h.removal_order]
    if missing:
        raise MissingRemovalRank(missing)
    pops = sorted(h.pops, key=lambda pop: h.removal_order[pop.op])
    inversion = happened_before(h).first_inversion(pops)
    if inversion is not None:
        i, j = inversion
        raise NotALinearExtension(pops[i].op, pops[j].op)
    return PopOrder(pop.op for pop in pops)


def _validate_order(h, order):
    if sorted(order.pops) != sorted(pop.op for pop in h.pops) or len(set(order.pops)) != len(order.pops):
        raise PopOrderError('pop order %s does not list every pop exactly once' % ' '.join(order.pops))
    pops = [h.op(pop_id) for pop_id in order.pops]
    inversion = happened_before(h).first_inversion(pops)
    if inversion is not None:
        i, j = inversion
        raise NotALinearExtension(pops[i].op, pops[j].op)


def _earlier_matches(m, order, i):
    return [m[pop_id] for pop_id in order.pops[:i - 1] if m[pop_id] is not EMPTY]


def check_condition1(h, m, order, i):
    """Check that the ``i``-th pop (1-based) removes a latest push among those still in the stack."""
    pop = h.op(order.pops[i - 1])
    target = h.op(m[pop.op])
    earlier = set(_earlier_matches(m, order, i))
    candidates = [push for push in h.pushes if push.op not in earlier and push.precedes(pop)]
    if target not in candidates:
        return Violation('condition-1', (pop.op, target.op), '%s is not among the pushes still present before %s' % (
            target.op, pop.op), i)
    later = [push for push in candidates if target.precedes(push)]
    if later:
        push = max(later, key=lambda p: p.inv_seq)
        return Violation('condition-1', (pop.op, target.op, push.op), '%s removes %s although %s was pushed later' % (
            pop.op, target.op, push.op), i)
    return None


def check_condition2(h, m, order, i):
    """Check that the ``i``-th pop (1-based), which returned empty, could see an empty stack."""
    pop = h.op(order.pops[i - 1])
    earlier_ids = _earlier_matches(m, order, i)
    earlier = set(earlier_ids)
    remaining = [push for push in h.pushes if push.op not in earlier]

    preceding = [push for push in remaining if push.precedes(pop)]
    if preceding:
        push = max(preceding, key=lambda p: p.inv_seq)
        return Violation('condition-2a', (pop.op, push.op), '%s returned empty but %s was never removed before it' % (
            pop.op, push.op), i)

    overlapping = [push for push in remaining if not pop.precedes(push)]
    if overlapping and earlier_ids:
        push = min(overlapping, key=lambda p: p.ret_seq)
        removed = max((h.op(push_id) for push_id in earlier_ids), key=lambda p: p.inv_seq)
        if push.precedes(removed):
            pop_x = m.pop_of()[removed.op]
            return Violation('condition-2b', (pop.op, push.op, pop_x), (
                '%s returned empty but %s, still in the stack, precedes %s removed by %s' % (
                    pop.op, push.op, removed.op, pop_x)), i)
    return None


class ConditionTracker:
    """Evaluates both conditions pop by pop in O(log n) each.

    Pushes not yet removed are kept in two segment trees: ``latest`` by
    response order folding the largest invocation, ``earliest`` by invocation
    order folding the smallest response.
    """

    def __init__(self, h, m):
        self.h = h
        self.m = m
        self.by_ret = sorted(h.pushes, key=lambda p: p.ret_seq)
        self.by_inv = sorted(h.pushes, key=lambda p: p.inv_seq)
        self.ret_keys = [p.ret_seq for p in self.by_ret]
        self.inv_keys = [p.inv_seq for p in self.by_inv]
        self.ret_index = {p.op: k for k, p in enumerate(self.by_ret)}
        self.inv_index = {p.op: k for k, p in enumerate(self.by_inv)}
        self.latest = SegmentTree([(p.inv_seq, k) for k, p in enumerate(self.by_ret)], max, (-1, -1))
        self.earliest = SegmentTree([(p.ret_seq, k) for k, p in enumerate(self.by_inv)], min, (math.inf, -1))
        self.removed = set()
        self.newest_removed = None
        self.newest_remover = None
        self.index = 0

    def latest_preceding(self, pop):
        _, k = self.latest.query(0, bisect_left(self.ret_keys, pop.inv_seq))
        return self.by_ret[k] if k >= 0 else None

    def earliest_overlapping(self, pop):
        _, k = self.earliest.query(0, bisect_left(self.inv_keys, pop.ret_seq))
        return self.by_inv[k] if k >= 0 else None

    def remove(self, push, pop_id):
        self.latest.update(self.ret_index[push.op], (-1, -1))
        self.earliest.update(self.inv_index[push.op], (math.inf, -1))
        self.removed.add(push.op)
        if self.newest_removed is None or push.inv_seq > self.newest_removed.inv_seq:
            self.newest_removed = push
            self.newest_remover = pop_id

    def advance(self, pop_id):
        """Check the next pop of the order; returns a Violation or None."""
        self.index += 1
        i = self.index
        pop = self.h.op(pop_id)
        if self.m[pop_id] is EMPTY:
            latest = self.latest_preceding(pop)
            if latest is not None:
                return Violation('condition-2a', (pop.op, latest.op),
                                 '%s returned empty but %s was never removed before it' % (pop.op, latest.op), i)
            push = self.earliest_overlapping(pop)
            if push is not None and self.newest_removed is not None and push.precedes(self.newest_removed):
                return Violation('condition-2b', (pop.op, push.op, self.newest_remover), (
                    '%s returned empty but %s, still in the stack, precedes %s removed by %s' % (
                        pop.op, push.op, self.newest_removed.op, self.newest_remover)), i)
            return None

        target = self.h.op(self.m[pop_id])
        if target.op in self.removed or not target.precedes(pop):
            return Violation('condition-1', (pop.op, target.op),
                             '%s is not among the pushes still present before %s' % (target.op, pop.op), i)
        latest = self.latest_preceding(pop)
        if target.precedes(latest):
            return Violation('condition-1', (pop.op, target.op, latest.op),
                             '%s removes %s although %s was pushed later' % (pop.op, target.op, latest.op), i)
        self.remove(target, pop_id)
        return None


def _witness(h, m, order, warnings):
    """Witness for an order passing both conditions, or None if no sequence realizes ``m``."""
    try:
        return linearize(h, m, order)
    except InternalInvariantBroken as e:
        message = 'pop order %s passes both conditions but yields no witness: %s' % (' '.join(order.pops), e)
        LOGGER.warning(message)
        warnings.append(message)
    return schedule_witness(h, m, order)


def _unrealizable(order, warnings):
    return Verdict.violated(Violation('construction', tuple(order.pops), (
        'pop order %s passes both conditions but no sequence realizes the match' % ' '.join(order.pops))), warnings)


def check(h, m, order):
    """Check a reduced history against one fixed pop order."""
    _validate_order(h, order)
    tracker = ConditionTracker(h, m)
    for pop_id in order.pops:
        violation = tracker.advance(pop_id)
        if violation is not None:
            LOGGER.debug('pop %d (%s) fails %s' % (violation.pop_index, pop_id, violation.condition))
            return Verdict.violated(violation)
    warnings = []
    witness = _witness(h, m, order, warnings)
    if witness is None:
        return _unrealizable(order, warnings)
    return Verdict.linearizable(witness.ops, warnings)


def check_searching(h, m, max_pops=DEFAULT_MAX_SEARCH_POPS):
    """Search the linear extensions of happened-before over the pops for one that passes.

    Orders are explored depth first, minimal pops by ascending invocation; a
    prefix is abandoned as soon as its last pop fails a condition. The first
    order passing both conditions ends the search.
    """
    if len(h.pops) > max_pops:
        raise SearchBoundExceeded(len(h.pops), max_pops, 'pops')
    hb = happened_before(h)
    warnings = []
    first_violation = []
    passing = []
    dead = set()
    chosen = []

    def search(remaining):
        if not remaining:
            passing.append(PopOrder(chosen))
            return True
        key = frozenset(chosen)
        if key in dead:
            return False
        for pop in sorted(hb.minimal(remaining), key=lambda p: p.inv_seq):
            chosen.append(pop.op)
            order = PopOrder(chosen)
            if m[pop.op] is EMPTY:
                violation = check_condition2(h, m, order, len(chosen))
            else:
                violation = check_condition1(h, m, order, len(chosen))
            if violation is None:
                if search([p for p in remaining if p is not pop]):
                    return True
                LOGGER.debug('no passing order extends %s' % ' '.join(chosen))
            elif not first_violation:
                first_violation.append(violation)
            chosen.pop()
        # the conditions only depend on which pops came before, not their order
        dead.add(key)
        return False

    if not search(list(h.pops)):
        return Verdict.violated(first_violation[0], warnings)
    order = passing[0]
    witness = _witness(h, m, order, warnings)
    if witness is None:
        return _unrealizable(order, warnings)
    return Verdict.linearizable(witness.ops, warnings)


def _rejected(violation, warnings):
    LOGGER.info('history rejected: %s' % violation)
    return Verdict.violated(violation, warnings)


def verify(h, pop_order=SEARCH, strip_elim=True, max_search_pops=DEFAULT_MAX_SEARCH_POPS):
    """Match, reduce, check and rebuild a witness for the whole history."""
    if pop_order not in POP_ORDERS:
        raise ValueError('unknown pop order source %r' % pop_order)
    warnings = list(h.warnings)
    try:
        m = derive_match(h)
    except UnmatchedPopValue as e:
        return _rejected(Violation('clause-1', (e.pop,), str(e)), warnings)
    violation = validate_match(h, m)
    if violation is not None:
        return _rejected(violation, warnings)

    pairs = frozenset()
    if strip_elim:
        pairs = find_elimination_pairs(h, m)
        warnings.extend(corroborate(h, pairs))
    reduced = strip(h, pairs)
    reduced_match = m.restrict(pop.op for pop in reduced.pops)
    LOGGER.info('checking %d operations (%d elimination pairs stripped) with %s pop order' % (
        len(reduced), len(pairs), pop_order))

    if pop_order == RECORDED:
        try:
            order = pop_order_from_removals(reduced)
        except NotALinearExtension as e:
            return _rejected(Violation('pop-order', e.ops, str(e)), warnings)
        verdict = check(reduced, reduced_match, order)
    else:
        verdict = check_searching(reduced, reduced_match, max_search_pops)
    warnings.extend(verdict.warnings)
    if not verdict.ok:
        return _rejected(verdict.violation, warnings)

    witness = reinsert_elimination_pairs(WitnessSequence(verdict.witness), pairs, h)
    if len(witness) != len(h):
        raise InternalInvariantBroken('witness holds %d of %d operations' % (len(witness), len(h)))
    certify(witness.ops, h)
    LOGGER.info('history linearizable, witness of %d operations' % len(witness))
    return Verdict.linearizable(witness.ops, warnings)
