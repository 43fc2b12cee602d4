import enum
import logging
from dataclasses import dataclass
from types import MappingProxyType

from stacklin.exceptions import (
    DuplicateOpId, DuplicatePushValue, MalformedLine, PrecedenceCycle, RetWithoutInv,
)

LOGGER = logging.getLogger(__name__)

HEADER = 'stacklin-history v1'

INV = 'inv'
RET = 'ret'
PUSH = 'push'
POP = 'pop'
REMOVAL = 'rm'
ELIMINATED = 'elim'


class Marker(enum.Enum):
    EMPTY = 'empty'

    def __str__(self):
        return self.value

    def __repr__(self):
        return self.name


# returned by pops on an empty stack, and the image of such pops under Match
EMPTY = Marker.EMPTY


@dataclass(frozen=True)
class Event:
    seq: int
    thread: str
    kind: str
    op: str
    method: str = None
    value: object = None

    def structure(self):
        return self.kind, self.op, self.thread, self.method, self.value


@dataclass(frozen=True)
class Operation:
    op: str
    thread: str
    method: str
    value: object
    inv_seq: int
    ret_seq: int

    @property
    def is_push(self):
        return self.method == PUSH

    @property
    def is_pop(self):
        return self.method == POP

    @property
    def returned_empty(self):
        return self.method == POP and self.value is EMPTY

    def precedes(self, other):
        return self.ret_seq < other.inv_seq

    def __str__(self):
        return '%s(%s)#%s' % (self.method, self.value, self.op)


def _complete(events):
    """Pair invocations with responses; drop invocations that never returned."""
    invocations = {}
    seen = set()
    pushed = {}
    ops = []
    for event in events:
        if event.kind == INV:
            if event.op in seen:
                raise DuplicateOpId(event.op, event.seq)
            seen.add(event.op)
            invocations[event.op] = event
            if event.method == PUSH:
                if event.value in pushed:
                    raise DuplicatePushValue(event.value, event.op, event.seq)
                pushed[event.value] = event.op
        else:
            inv = invocations.pop(event.op, None)
            if inv is None or inv.thread != event.thread:
                raise RetWithoutInv(event.op, event.seq)
            ops.append(Operation(
                op=event.op,
                thread=event.thread,
                method=inv.method,
                value=inv.value if inv.method == PUSH else event.value,
                inv_seq=inv.seq,
                ret_seq=event.seq,
            ))
    pending = set(invocations)
    if pending:
        events = [e for e in events if e.op not in pending]
    return events, ops, sorted(pending, key=lambda op: invocations[op].seq)


class History:
    """A complete history: events sorted by seq, plus the operations they form.

    Pending invocations are dropped on construction and reported in ``warnings``.
    ``removal_order`` maps pop ids to the rank of their removal action and
    ``eliminated`` holds the pops the recorder marked as eliminated.
    """

    def __init__(self, events=(), removal_order=None, eliminated=(), warnings=()):
        events = sorted(events, key=lambda e: e.seq)
        events, ops, pending = _complete(events)
        warnings = list(warnings)
        for op in pending:
            message = 'dropped pending invocation of operation %s' % op
            LOGGER.warning(message)
            warnings.append(message)
        self.events = tuple(events)
        self.ops = tuple(sorted(ops, key=lambda o: o.inv_seq))
        self._by_id = {o.op: o for o in self.ops}
        self.pushes = tuple(o for o in self.ops if o.is_push)
        self.pops = tuple(o for o in self.ops if o.is_pop)
        pops = {o.op for o in self.pops}
        self.removal_order = MappingProxyType({
            op: rank for op, rank in (removal_order or {}).items() if op in pops
        })
        self.eliminated = frozenset(op for op in eliminated if op in pops)
        self.warnings = tuple(warnings)

    def op(self, op_id):
        return self._by_id[op_id]

    def __contains__(self, op_id):
        return op_id in self._by_id

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def thread_events(self, thread):
        return tuple(e for e in self.events if e.thread == thread)

    def is_sequential(self):
        if len(self.events) % 2:
            return False
        pairs = zip(self.events[::2], self.events[1::2])
        return all(inv.kind == INV and ret.kind == RET and inv.op == ret.op for inv, ret in pairs)

    def restrict(self, op_ids):
        op_ids = set(op_ids)
        return History(
            events=[e for e in self.events if e.op in op_ids],
            removal_order={op: rank for op, rank in self.removal_order.items() if op in op_ids},
            eliminated=[op for op in self.eliminated if op in op_ids],
            warnings=self.warnings,
        )

    def structure(self):
        return (
            tuple(e.structure() for e in self.events),
            tuple(sorted(self.removal_order.items())),
            tuple(sorted(self.eliminated)),
        )

    def __eq__(self, other):
        if not isinstance(other, History):
            return NotImplemented
        return self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())

    def __repr__(self):
        return '<History: %d pushes, %d pops>' % (len(self.pushes), len(self.pops))


class HBRelation:
    """A strict partial order given by a ``precedes(a, b)`` predicate."""

    def __init__(self, precedes):
        self._precedes = precedes

    def precedes(self, a, b):
        return a is not b and self._precedes(a, b)

    def interleaved(self, a, b):
        return not self.precedes(a, b) and not self.precedes(b, a)

    def maximal(self, items):
        return [x for x in items if not any(self.precedes(x, y) for y in items)]

    def minimal(self, items):
        return [x for x in items if not any(self.precedes(y, x) for y in items)]

    def first_inversion(self, seq):
        for j, later in enumerate(seq):
            for i in range(j):
                if self.precedes(later, seq[i]):
                    return i, j
        return None


class IntervalOrder(HBRelation):
    """Happened-before of a history: ``a`` precedes ``b`` iff a returned before b was invoked."""

    def __init__(self, history=None):
        super().__init__(Operation.precedes)
        self.history = history

    def precedes(self, a, b):
        return a.ret_seq < b.inv_seq

    def maximal(self, items):
        if not items:
            return []
        latest = max(o.inv_seq for o in items)
        return [o for o in items if o.ret_seq > latest]

    def minimal(self, items):
        if not items:
            return []
        earliest = min(o.ret_seq for o in items)
        return [o for o in items if o.inv_seq < earliest]

    def first_inversion(self, seq):
        # an interval order is violated iff some element returned before a
        # previously placed element was invoked
        latest = None
        for j, op in enumerate(seq):
            if latest is not None and op.ret_seq < seq[latest].inv_seq:
                return latest, j
            if latest is None or op.inv_seq > seq[latest].inv_seq:
                latest = j
        return None



def happened_before(h):
    return IntervalOrder(h)


@dataclass(frozen=True)
class PopOrder:
    """A total order over pop ids; ``pops[0]`` is the first pop."""

    pops: tuple

    def __post_init__(self):
        object.__setattr__(self, 'pops', tuple(self.pops))

    def __len__(self):
        return len(self.pops)

    def __iter__(self):
        return iter(self.pops)


def insertion_point(seq, x, hb):
    """Index right after the rightmost element of ``seq`` preceding ``x``, or 0."""
    for i in range(len(seq) - 1, -1, -1):
        if hb.precedes(seq[i], x):
            return i + 1
    return 0


def insert_preserving(seq, x, hb, check=True):
    """Place ``x`` right after the rightmost element that precedes it, or at the front."""
    seq = list(seq)
    if check:
        inversion = hb.first_inversion(seq)
        if inversion is not None:
            i, j = inversion
            raise PrecedenceCycle(seq[i], seq[j])
    seq.insert(insertion_point(seq, x, hb), x)
    return seq


def is_linear_extension(seq, hb):
    return hb.first_inversion(list(seq)) is None


def _token(line_no, line, token):
    if not token.isascii() or not token.isprintable() or token == str(EMPTY):
        raise MalformedLine(line_no, line, 'invalid value token')
    return token


def parse_history(text):
    lines = text.split('\n')
    if lines and lines[-1] == '':
        lines.pop()
    if not lines or lines[0].strip() != HEADER:
        raise MalformedLine(1, lines[0] if lines else '', 'missing header %r' % HEADER)

    events = []
    methods = {}
    removal_order = {}
    ranks = set()
    eliminated = set()
    in_metadata = False
    for line_no, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        kind = tokens[0]
        if kind in (INV, RET) and in_metadata:
            raise MalformedLine(line_no, line, 'event after metadata')

        if kind == INV:
            if len(tokens) == 5 and tokens[3] == PUSH:
                value = _token(line_no, line, tokens[4])
            elif len(tokens) == 4 and tokens[3] == POP:
                value = None
            else:
                raise MalformedLine(line_no, line)
            op, thread, method = tokens[1], tokens[2], tokens[3]
            methods.setdefault(op, method)
            events.append(Event(seq=line_no, thread=thread, kind=INV, op=op, method=method, value=value))

        elif kind == RET:
            if len(tokens) not in (3, 4):
                raise MalformedLine(line_no, line)
            op, thread = tokens[1], tokens[2]
            if op not in methods:
                raise RetWithoutInv(op, line_no)
            if methods[op] == PUSH:
                if len(tokens) != 3:
                    raise MalformedLine(line_no, line, 'push response carries a value')
                value = None
            else:
                if len(tokens) != 4:
                    raise MalformedLine(line_no, line, 'pop response without a value')
                value = EMPTY if tokens[3] == str(EMPTY) else _token(line_no, line, tokens[3])
            events.append(Event(seq=line_no, thread=thread, kind=RET, op=op, value=value))

        elif kind == REMOVAL:
            in_metadata = True
            if len(tokens) != 3 or not tokens[2].isdigit() or int(tokens[2]) < 1:
                raise MalformedLine(line_no, line)
            op, rank = tokens[1], int(tokens[2])
            if methods.get(op) != POP:
                raise MalformedLine(line_no, line, 'removal rank for unknown pop')
            if op in removal_order or rank in ranks:
                raise MalformedLine(line_no, line, 'duplicate removal rank')
            removal_order[op] = rank
            ranks.add(rank)

        elif kind == ELIMINATED:
            in_metadata = True
            if len(tokens) != 2:
                raise MalformedLine(line_no, line)
            if methods.get(tokens[1]) != POP:
                raise MalformedLine(line_no, line, 'elimination marker for unknown pop')
            eliminated.add(tokens[1])

        else:
            raise MalformedLine(line_no, line)

    return History(events, removal_order=removal_order, eliminated=eliminated)


def emit_history(h):
    lines = [HEADER]
    for event in h.events:
        if event.kind == INV:
            if event.method == PUSH:
                lines.append('%s %s %s %s %s' % (INV, event.op, event.thread, PUSH, event.value))
            else:
                lines.append('%s %s %s %s' % (INV, event.op, event.thread, POP))
        elif h.op(event.op).is_pop:
            lines.append('%s %s %s %s' % (RET, event.op, event.thread, event.value))
        else:
            lines.append('%s %s %s' % (RET, event.op, event.thread))
    for op, rank in sorted(h.removal_order.items(), key=lambda item: item[1]):
        lines.append('%s %s %d' % (REMOVAL, op, rank))
    for op in sorted(h.eliminated, key=lambda op: h.op(op).inv_seq):
        lines.append('%s %s' % (ELIMINATED, op))
    return '\n'.join(lines) + '\n'
