"""Witness construction for histories that pass both pop-order conditions.

Pushes are linearized first, right to left. Pops are then placed after the
rightmost push preceding them and moved right until no earlier pop's pair
spans them. Empty pops split the pop order into segments which are
linearized on their own and joined around the empty pops. Pushes never
popped are added last, in gaps where the stack holds nothing else that is
popped later.

``Scheduler`` searches left to right for a witness realizing a match and is
used when the step by step construction fails.
"""
import heapq
import logging
import math
import random
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass
from fractions import Fraction

from stacklin.exceptions import InternalInvariantBroken
from stacklin.history import EMPTY, PopOrder, happened_before
from stacklin.oracle import is_legal_sequential
from stacklin.structures import SegmentTree

LOGGER = logging.getLogger(__name__)

_NOWHERE = (-1, -1, -1)


@dataclass(frozen=True)
class WitnessSequence:
    ops: tuple

    def __post_init__(self):
        object.__setattr__(self, 'ops', tuple(self.ops))

    @property
    def op_ids(self):
        return tuple(op.op for op in self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def __str__(self):
        return ' '.join(self.op_ids)


def certify(seq, h):
    """Raise InternalInvariantBroken unless ``seq`` is a LIFO-legal linear extension of ``h``."""
    if not is_legal_sequential(seq):
        raise InternalInvariantBroken('witness is not a legal stack sequence: %s' % ' '.join(o.op for o in seq))
    inversion = happened_before(h).first_inversion(list(seq))
    if inversion is not None:
        i, j = inversion
        raise InternalInvariantBroken('witness places %s before %s, which happened before it' % (
            seq[i].op, seq[j].op))


def build_push_linearization(h, m, order, pushes=None):
    """Order the pushes so that a push matched to an earlier pop sits closer to the top.

    Built right to left: the next push is a maximal one among those left,
    preferring the one whose pop comes first in ``order``; never-popped pushes last.
    """
    pushes = list(h.pushes if pushes is None else pushes)
    rank = {pop_id: i for i, pop_id in enumerate(order.pops)}
    pop_of = m.pop_of()

    def key(push):
        return rank.get(pop_of.get(push.op), math.inf), -push.inv_seq, push.op

    by_inv = sorted(pushes, key=lambda p: p.inv_seq)
    by_ret = sorted(pushes, key=lambda p: p.ret_seq, reverse=True)
    latest = len(by_inv) - 1
    added = 0
    placed = set()
    ready = []
    result = []
    while len(result) < len(pushes):
        while latest >= 0 and by_inv[latest].op in placed:
            latest -= 1
        bound = by_inv[latest].inv_seq if latest >= 0 else -1
        while added < len(by_ret) and by_ret[added].ret_seq > bound:
            heapq.heappush(ready, (key(by_ret[added]), by_ret[added]))
            added += 1
        if not ready:
            raise InternalInvariantBroken('no maximal push left among %d pushes' % (len(pushes) - len(result)))
        push = heapq.heappop(ready)[1]
        placed.add(push.op)
        result.append(push)
    result.reverse()
    LOGGER.debug('push linearization: %s' % ' '.join(p.op for p in result))
    return result


def insert_pops(pushes, h, m, order, pops=None):
    """Insert the non-empty pops of ``order`` into the push linearization ``pushes``.

    Slots are addressed by block (block ``b`` lies between ``pushes[b - 1]``
    and ``pushes[b]``) and a fractional key inside the block.
    """
    if pops is None:
        pops = [h.op(pop_id) for pop_id in order.pops if m[pop_id] is not EMPTY]
    position = {push.op: j for j, push in enumerate(pushes)}
    returns = SegmentTree([(push.ret_seq, j) for j, push in enumerate(pushes)], min, (math.inf, -1))
    # by the position of their matched push: where each placed pop sits
    located = SegmentTree([_NOWHERE] * len(pushes), max, _NOWHERE)
    blocks = [[] for _ in range(len(pushes) + 1)]

    for i, pop in enumerate(pops):
        j = returns.rightmost(lambda value, pop=pop: value[0] < pop.inv_seq)
        block = j + 1
        key = blocks[block][-1][0] + 1 if blocks[block] else Fraction(1)
        while True:
            spanning = located.query(0, block)
            if spanning[:2] <= (block, key):
                break
            block, previous = spanning[0], spanning[1]
            keys = [entry[0] for entry in blocks[block]]
            after = bisect_left(keys, previous) + 1
            following = keys[after] if after < len(keys) else previous + 2
            key = (previous + following) / 2
            LOGGER.debug('moved %s after %s' % (pop.op, pops[spanning[2]].op))
        insort(blocks[block], (key, i))
        located.update(position[m[pop.op]], (block, key, i))

    seq = []
    for b, entries in enumerate(blocks):
        seq.extend(pops[i] for _, i in entries)
        if b < len(pushes):
            seq.append(pushes[b])
    certify(seq, h)
    return WitnessSequence(seq)


def _segments(m, order):
    segments = [[]]
    empties = []
    for pop_id in order.pops:
        if m[pop_id] is EMPTY:
            empties.append(pop_id)
            segments.append([])
        else:
            segments[-1].append(pop_id)
    return segments, empties


def insert_empty_pops(h, m, order, partial=None):
    """Place each empty pop between the linearization of everything popped before it and the rest.

    ``partial`` is the linearization of the non-empty part; it is the answer
    when ``order`` holds no empty pop. Every push of ``h`` must be popped.
    """
    segments, empties = _segments(m, order)
    if not empties and partial is not None:
        return partial
    seq = []
    for k, segment in enumerate(segments):
        pops = [h.op(pop_id) for pop_id in segment]
        pushes = [h.op(m[pop_id]) for pop_id in segment]
        segment_order = PopOrder(segment)
        linear = build_push_linearization(h, m, segment_order, pushes)
        seq.extend(insert_pops(linear, h, m, segment_order, pops))
        if k < len(empties):
            seq.append(h.op(empties[k]))
    certify(seq, h)
    return WitnessSequence(seq)


def insert_unpopped_pushes(witness, h, m):
    """Add the pushes of ``h`` that no pop removed to ``witness``.

    Each goes into the latest gap allowed by happened-before where the stack
    holds nothing popped later and no empty pop follows. Pushes are placed by
    descending invocation; a push lands before any already placed one it
    precedes, and pushes sharing a gap keep invocation order.
    """
    popped = set(m.pop_of())
    unpopped = sorted((push for push in h.pushes if push.op not in popped), key=lambda p: p.inv_seq, reverse=True)
    if not unpopped:
        return witness
    ops = list(witness.ops)
    last_empty = max((i for i, op in enumerate(ops) if op.returned_empty), default=-1)
    quiet = [0] if last_empty < 0 else []
    depth = 0
    for g, op in enumerate(ops, start=1):
        depth += 1 if op.is_push else 0 if op.returned_empty else -1
        if depth == 0 and g > last_empty:
            quiet.append(g)

    returns = SegmentTree([(op.ret_seq, i) for i, op in enumerate(ops)], min, (math.inf, -1))
    invocations = SegmentTree([(op.inv_seq, i) for i, op in enumerate(ops)], max, (-1, -1))
    gaps = {}
    # placed pushes by descending invocation, and the smallest gap among each prefix
    placed_invs = []
    placed_gaps = []
    for push in unpopped:
        lo = returns.rightmost(lambda value, push=push: value[0] < push.inv_seq) + 1
        hi = invocations.leftmost(lambda value, push=push: value[0] > push.ret_seq)
        if hi < 0:
            hi = len(ops)
        successors = bisect_left(placed_invs, -push.ret_seq)
        if successors:
            hi = min(hi, placed_gaps[successors - 1])
        at = bisect_right(quiet, hi) - 1
        if at < 0 or quiet[at] < lo:
            raise InternalInvariantBroken('no quiet gap between positions %d and %d for never popped %s' % (
                lo, hi, push.op))
        g = quiet[at]
        gaps.setdefault(g, []).append(push)
        placed_invs.append(-push.inv_seq)
        placed_gaps.append(min(placed_gaps[-1], g) if placed_gaps else g)

    seq = []
    for g in range(len(ops) + 1):
        seq.extend(reversed(gaps.get(g, ())))
        if g < len(ops):
            seq.append(ops[g])
    certify(seq, h)
    return WitnessSequence(seq)


def linearize(h, m, order):
    """Build a witness step by step for an order passing both conditions.

    Pushes never popped are left out of the construction and added at the end.
    """
    popped = set(m.pop_of())
    core = h
    if len(popped) < len(h.pushes):
        core = h.restrict(op.op for op in h.ops if not op.is_push or op.op in popped)
    if any(m[pop_id] is EMPTY for pop_id in order.pops):
        witness = insert_empty_pops(core, m, order)
    else:
        witness = insert_pops(build_push_linearization(core, m, order), core, m, order)
    witness = insert_unpopped_pushes(witness, h, m)
    if len(witness) != len(h):
        raise InternalInvariantBroken('witness holds %d of %d operations' % (len(witness), len(h)))
    return witness


@dataclass
class _Choice:
    depth: int
    key: tuple
    pushes: list
    tried: int = 0


class Scheduler:
    """Exact left to right search for a witness realizing the match ``m``.

    A pop goes in as soon as its value is on top and an empty pop as soon as
    the stack is empty. A never popped push goes in once the stack holds
    nothing popped later and no empty pop is left. Only the next popped push
    branches; candidates are tried latest removed first, following ``order``
    when given. Dead states are kept by a hash of the placed set and the stack.
    """

    def __init__(self, h, m, order=None):
        self.h = h
        self.m = m
        self.pop_of = m.pop_of()
        pops = order.pops if order is not None else [pop.op for pop in h.pops]
        self.rank = {pop_id: i for i, pop_id in enumerate(pops)}
        rng = random.Random(len(h))
        self.codes = {op.op: rng.getrandbits(64) for op in h.ops}
        self.by_inv = {op.inv_seq: op for op in h.ops}
        self.invs = sorted(self.by_inv)
        self.rets = sorted(op.ret_seq for op in h.ops)
        self.empty_rets = sorted(pop.ret_seq for pop in h.pops if pop.returned_empty)
        self.stack = []
        # one entry per stack level: hash of the stack, values popped later, earliest response of their pops
        self.levels = [(0, 0, math.inf)]
        self.placed = 0
        self.trail = []

    def available(self):
        """Unplaced operations all of whose predecessors are placed."""
        if not self.rets:
            return []
        return [self.by_inv[inv] for inv in self.invs[:bisect_left(self.invs, self.rets[0])]]

    def _push(self, push):
        code, matched, earliest = self.levels[-1]
        pop_id = self.pop_of.get(push.op)
        if pop_id is not None:
            matched += 1
            earliest = min(earliest, self.h.op(pop_id).ret_seq)
        self.stack.append(push)
        self.levels.append((hash((code, push.op)), matched, earliest))

    def place(self, op):
        del self.invs[bisect_left(self.invs, op.inv_seq)]
        del self.rets[bisect_left(self.rets, op.ret_seq)]
        if op.is_push:
            self._push(op)
        elif op.returned_empty:
            del self.empty_rets[bisect_left(self.empty_rets, op.ret_seq)]
        else:
            self.stack.pop()
            self.levels.pop()
        self.placed ^= self.codes[op.op]
        self.trail.append(op)

    def undo(self, depth):
        while len(self.trail) > depth:
            op = self.trail.pop()
            self.placed ^= self.codes[op.op]
            insort(self.invs, op.inv_seq)
            insort(self.rets, op.ret_seq)
            if op.is_push:
                self.stack.pop()
                self.levels.pop()
            elif op.returned_empty:
                insort(self.empty_rets, op.ret_seq)
            else:
                self._push(self.h.op(self.m[op.op]))

    def forced(self, available):
        if self.stack:
            pop_id = self.pop_of.get(self.stack[-1].op)
            for op in available:
                if op.op == pop_id:
                    return op
        else:
            for op in available:
                if op.returned_empty:
                    return op
        if self.levels[-1][1] == 0 and not self.empty_rets:
            for op in available:
                if op.is_push and op.op not in self.pop_of:
                    return op
        return None

    def choices(self, available):
        earliest = self.levels[-1][2]
        if self.empty_rets:
            earliest = min(earliest, self.empty_rets[0])
        pushes = []
        for op in available:
            pop_id = self.pop_of.get(op.op) if op.is_push else None
            # values below and pending empty pops come after this pop
            if pop_id is not None and earliest > self.h.op(pop_id).inv_seq:
                pushes.append(op)
        return sorted(pushes, key=lambda push: self.rank[self.pop_of[push.op]], reverse=True)

    def run(self):
        frames = []
        dead = set()
        while True:
            available = self.available()
            move = self.forced(available)
            if move is not None:
                self.place(move)
                continue
            if len(self.trail) == len(self.h):
                return WitnessSequence(self.trail)
            key = (self.placed, self.levels[-1][0])
            pushes = [] if key in dead else self.choices(available)
            if pushes:
                frames.append(_Choice(len(self.trail), key, pushes))
            else:
                dead.add(key)
            while frames and frames[-1].tried == len(frames[-1].pushes):
                dead.add(frames.pop().key)
            if not frames:
                return None
            frame = frames[-1]
            self.undo(frame.depth)
            self.place(frame.pushes[frame.tried])
            frame.tried += 1


def schedule_witness(h, m, order=None):
    """Return a witness of ``h`` realizing ``m``, or None if there is none."""
    witness = Scheduler(h, m, order).run()
    if witness is None:
        LOGGER.info('no sequence of %d operations realizes the match' % len(h))
        return None
    certify(witness.ops, h)
    return witness


def reinsert_elimination_pairs(witness, pairs, h):
    """Put each stripped pop back after its rightmost predecessor, its push directly before it.

    A pair lands right after the rightmost operation that precedes its pop or
    its push; pairs go in by ascending invocation of whichever of the two
    started later. Inserted operations live in the gaps of ``witness``; gap
    ``g`` lies right after ``witness.ops[g - 1]``.
    """
    if not pairs:
        return witness
    ops = list(witness.ops)
    returns = SegmentTree([(op.ret_seq, i) for i, op in enumerate(ops)], min, (math.inf, -1))
    gaps = [[] for _ in range(len(ops) + 1)]
    filled = SegmentTree([(math.inf, -1)] * len(gaps), min, (math.inf, -1))

    def started(pair):
        return max(h.op(pair.push).inv_seq, h.op(pair.pop).inv_seq)

    for pair in sorted(pairs, key=started):
        bound = started(pair)

        def before(value, bound=bound):
            return value[0] < bound

        j = returns.rightmost(before)
        g = filled.rightmost(before)
        if g > j:
            entries = gaps[g]
            at = max(k for k, op in enumerate(entries) if op.ret_seq < bound) + 1
        else:
            g, at = j + 1, 0
        gaps[g][at:at] = [h.op(pair.push), h.op(pair.pop)]
        filled.update(g, (min(op.ret_seq for op in gaps[g]), g))

    seq = list(gaps[0])
    for op, entries in zip(ops, gaps[1:]):
        seq.append(op)
        seq.extend(entries)
    certify(seq, h)
    return WitnessSequence(seq)
