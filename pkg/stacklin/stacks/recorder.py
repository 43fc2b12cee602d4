import collections
import logging
import threading

from stacklin.history import INV, RET, Event, History
from stacklin.stacks.atomics import LOCK, AtomicCounter

LOGGER = logging.getLogger(__name__)


class Recorder:
    """Collects invocation and response events of a concurrent run.

    Each event takes its sequence number and its place in the sink under the
    global ``LOCK``. ``removed`` and ``eliminated`` are called by a pop, from
    inside the atomic step that decided its result.
    """

    def __init__(self):
        self.sequence = AtomicCounter(1)
        self.op_ids = AtomicCounter(1)
        self.ranks = AtomicCounter(1)
        self.events = collections.deque()
        self.removal_order = {}
        self.eliminated_pops = set()
        self.local = threading.local()

    def invoke(self, method, value=None):
        op = str(self.op_ids.fetch_inc())
        thread = threading.current_thread().name
        with LOCK:
            self.events.append(Event(
                seq=self.sequence.fetch_inc(), thread=thread, kind=INV, op=op, method=method, value=value,
            ))
        self.local.op = op
        return op

    def respond(self, op, value=None):
        thread = threading.current_thread().name
        with LOCK:
            self.events.append(Event(seq=self.sequence.fetch_inc(), thread=thread, kind=RET, op=op, value=value))
        self.local.op = None

    def removed(self):
        op = self.local.op
        self.removal_order[op] = self.ranks.fetch_inc()

    def eliminated(self):
        self.eliminated_pops.add(self.local.op)

    def history(self):
        with LOCK:
            events = list(self.events)
            removal_order = dict(self.removal_order)
            eliminated = set(self.eliminated_pops)
        history = History(events, removal_order=removal_order, eliminated=eliminated)
        LOGGER.info('recorded %d operations, %d removal ranks, %d eliminated pops' % (
            len(history), len(removal_order), len(eliminated)))
        return history


class NullRecorder:
    def invoke(self, method, value=None):
        return None

    def respond(self, op, value=None):
        pass

    def removed(self):
        pass

    def eliminated(self):
        pass
