import logging

from stacklin.history import EMPTY
from stacklin.stacks.atomics import LOCK, AtomicReference, interleave
from stacklin.stacks.base import RecordedStack

LOGGER = logging.getLogger(__name__)


class Node:
    __slots__ = ('value', 'next')

    def __init__(self, value, next=None):
        self.value = value
        self.next = next


class TreiberStack(RecordedStack):
    """Lock-free linked stack; every update swings ``top`` with one compare-and-set."""

    def __init__(self, recorder=None, jitter=0.0):
        super().__init__(recorder=recorder, jitter=jitter)
        self.top = AtomicReference(None)

    def try_push(self, node):
        top = self.top.get()
        node.next = top
        interleave(self.jitter)
        return self.top.compare_and_set(top, node)

    def try_pop(self):
        """One attempt: ``(True, value)``, ``(True, EMPTY)`` or ``(False, None)`` on a lost race."""
        with LOCK:
            top = self.top.get()
            if top is None:
                self.recorder.removed()
                return True, EMPTY
        interleave(self.jitter)
        if self.top.compare_and_set(top, top.next, on_success=self.recorder.removed):
            return True, top.value
        return False, None

    def _push(self, value):
        node = Node(value)
        while not self.try_push(node):
            LOGGER.debug('push of %s lost the race, retrying' % value)

    def _pop(self):
        while True:
            success, value = self.try_pop()
            if success:
                return value
            LOGGER.debug('pop lost the race, retrying')
