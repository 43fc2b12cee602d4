"""Timestamped stack: one single-producer pool per thread, pops take the
youngest node across all pools.

Timestamps are intervals ``(start, end)`` of two readings of a shared
counter; ``a`` is older than ``b`` iff ``a.end < b.start``, so operations
that generate timestamps concurrently get incomparable ones.
"""
import logging
import math
import threading
from dataclasses import dataclass

from stacklin.history import EMPTY
from stacklin.stacks.atomics import LOCK, AtomicCounter, AtomicReference, AtomicStampedReference, interleave
from stacklin.stacks.base import RecordedStack

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Timestamp:
    start: float
    end: float

    def __str__(self):
        if self is TOP:
            return 'TOP'
        return '[%s, %s]' % (self.start, self.end)


# carried by a node between its insertion and its timestamp write
TOP = Timestamp(math.inf, math.inf)
BOTTOM = Timestamp(-1, -1)


def ts_less(a, b):
    return a.end < b.start


class TimestampCounter:
    def __init__(self):
        self.counter = AtomicCounter(0)

    def begin(self):
        return self.counter.fetch_inc()

    def finish(self, start):
        return Timestamp(start, self.counter.fetch_inc())

    def new_timestamp(self, jitter=0.0):
        start = self.begin()
        interleave(jitter)
        return self.finish(start)


class TSNode:
    __slots__ = ('val', 'timestamp', 'next', 'taken')

    def __init__(self, val, next=None):
        self.val = val
        self.timestamp = TOP
        self.next = next
        self.taken = AtomicReference(False)

    def __repr__(self):
        return '<TSNode %s %s%s>' % (self.val, self.timestamp, ' taken' if self.taken.get() else '')


class SPPool:
    """Single-producer list; ``top`` carries a stamp bumped on every swing."""

    def __init__(self, pool_id):
        self.id = pool_id
        self.top = AtomicStampedReference(None, 0)

    def insert(self, val):
        node = TSNode(val)
        while True:
            top, stamp = self.top.get()
            node.next = top
            if self.top.compare_and_set(top, node, stamp, stamp + 1):
                return node

    def get_youngest(self):
        """First node not yet taken, with the top snapshot it was found under."""
        snapshot = self.top.get()
        node = snapshot[0]
        while node is not None and node.taken.get():
            node = node.next
        return node, snapshot

    def remove(self, snapshot, node, on_success=None):
        if not node.taken.compare_and_set(False, True, on_success=on_success):
            return False, None
        top, stamp = snapshot
        first = top
        while first is not None and first.taken.get():
            first = first.next
        if first is not top:
            self.top.compare_and_set(top, first, stamp, stamp + 1)
        return True, node.val

    def __iter__(self):
        node = self.top.get()[0]
        while node is not None:
            yield node
            node = node.next


class TSStack(RecordedStack):
    def __init__(self, recorder=None, jitter=0.0, threads=1):
        super().__init__(recorder=recorder, jitter=jitter)
        self.pools = [SPPool(i) for i in range(threads)]
        self.clock = TimestampCounter()
        self.timestamps = {}
        self._owners = AtomicCounter(0)
        self._local = threading.local()

    @classmethod
    def from_options(cls, options, recorder=None, threads=1):
        return cls(recorder=recorder, jitter=options.jitter, threads=threads)

    @property
    def pool(self):
        pool = getattr(self._local, 'pool', None)
        if pool is None:
            index = self._owners.fetch_inc()
            if index >= len(self.pools):
                raise RuntimeError('TSStack has %d pools, thread %s has none' % (
                    len(self.pools), threading.current_thread().name))
            pool = self._local.pool = self.pools[index]
        return pool

    def _push(self, value):
        pool = self.pool
        node = pool.insert(value)
        interleave(self.jitter)
        timestamp = self.clock.new_timestamp(self.jitter)
        interleave(self.jitter)
        node.timestamp = timestamp
        self.timestamps[value] = timestamp

    def _pop(self):
        start = self.clock.new_timestamp(self.jitter)
        while True:
            success, value = self.try_rem(start)
            if success:
                return value
            LOGGER.debug('try_rem from %s failed, retrying' % start)

    def try_rem(self, start):
        candidate = None
        max_ts = BOTTOM
        candidate_pool = candidate_top = None
        empty = {}
        for pool in self.pools:
            node, snapshot = pool.get_youngest()
            if node is None:
                empty[pool.id] = snapshot
                continue
            timestamp = node.timestamp
            if ts_less(start, timestamp):
                # pushed while this pop was running
                return pool.remove(snapshot, node, on_success=self.recorder.eliminated)
            if ts_less(max_ts, timestamp):
                candidate, max_ts = node, timestamp
                candidate_pool, candidate_top = pool, snapshot
            interleave(self.jitter)

        if candidate is None:
            with LOCK:
                for pool in self.pools:
                    top, stamp = pool.top.get()
                    recorded_top, recorded_stamp = empty[pool.id]
                    if top is not recorded_top or stamp != recorded_stamp:
                        return False, None
                self.recorder.removed()
                return True, EMPTY

        return candidate_pool.remove(candidate_top, candidate, on_success=self.recorder.removed)
