"""Elimination-backoff stack: a Treiber stack whose contended operations
meet in a collision array, a push handing its value straight to a pop."""
import logging
import random
import time

from stacklin.stacks.atomics import AtomicStampedReference, interleave
from stacklin.stacks.treiber import Node, TreiberStack

LOGGER = logging.getLogger(__name__)

FREE = 0
WAITING = 1
BUSY = 2


class _Token:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


POP_TOKEN = _Token('POP_TOKEN')
TIMED_OUT = _Token('TIMED_OUT')


class Exchanger:
    """Lock-free rendezvous of two threads swapping one item each."""

    def __init__(self):
        self.slot = AtomicStampedReference(None, FREE)

    def exchange(self, item, timeout):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            other, state = self.slot.get()
            if state == FREE:
                if self.slot.compare_and_set(other, item, FREE, WAITING):
                    while time.monotonic() < deadline:
                        other, state = self.slot.get()
                        if state == BUSY:
                            self.slot.set(None, FREE)
                            return other
                        time.sleep(0)
                    if self.slot.compare_and_set(item, None, WAITING, FREE):
                        return TIMED_OUT
                    other, _ = self.slot.get()
                    self.slot.set(None, FREE)
                    return other
            elif state == WAITING:
                if self.slot.compare_and_set(other, item, WAITING, BUSY):
                    return other
            time.sleep(0)
        return TIMED_OUT


class EliminationArray:
    def __init__(self, capacity, timeout):
        self.exchangers = [Exchanger() for _ in range(capacity)]
        self.timeout = timeout

    def visit(self, item):
        return random.choice(self.exchangers).exchange(item, self.timeout)


class HSYStack(TreiberStack):
    """``fast_path=False`` sends every operation to the collision array."""

    def __init__(self, recorder=None, jitter=0.0, capacity=4, timeout=0.0005, fast_path=True):
        super().__init__(recorder=recorder, jitter=jitter)
        self.elimination = EliminationArray(capacity, timeout)
        self.fast_path = fast_path

    @classmethod
    def from_options(cls, options, recorder=None, threads=1):
        return cls(recorder=recorder, jitter=options.jitter, capacity=options.elimination_capacity,
                   timeout=options.elimination_timeout)

    def _push(self, value):
        node = Node(value)
        while True:
            if self.fast_path and self.try_push(node):
                return
            interleave(self.jitter)
            if self.elimination.visit(value) is POP_TOKEN:
                LOGGER.debug('push of %s eliminated' % value)
                return

    def _pop(self):
        while True:
            if self.fast_path:
                success, value = self.try_pop()
                if success:
                    return value
            interleave(self.jitter)
            other = self.elimination.visit(POP_TOKEN)
            if other is not POP_TOKEN and other is not TIMED_OUT:
                self.recorder.eliminated()
                LOGGER.debug('pop eliminated against push of %s' % other)
                return other


