import logging

from stacklin.exceptions import InternalInvariantBroken, SearchBoundExceeded
from stacklin.history import EMPTY, happened_before, is_linear_extension
from stacklin.verdicts import Verdict, Violation

LOGGER = logging.getLogger(__name__)

DEFAULT_MAX_OPS = 12


class SeqStackState:
    """The sequential LIFO stack, top of stack last."""

    def __init__(self, contents=()):
        self.contents = list(contents)

    def apply(self, op):
        """Replay ``op``; False if its result disagrees with the stack."""
        if op.is_push:
            self.contents.append(op.value)
            return True
        if not self.contents:
            return op.value is EMPTY
        if op.value is EMPTY or self.contents[-1] != op.value:
            return False
        self.contents.pop()
        return True


def is_legal_sequential(seq):
    state = SeqStackState()
    return all(state.apply(op) for op in seq)


def _step(stack, op):
    if op.is_push:
        return stack + (op.value,)
    if op.value is EMPTY:
        return None if stack else stack
    if stack and stack[-1] == op.value:
        return stack[:-1]
    return None


def oracle_check(h, max_ops=DEFAULT_MAX_OPS, prune=True):
    """Decide linearizability by enumerating linear extensions of happened-before."""
    if len(h) > max_ops:
        raise SearchBoundExceeded(len(h), max_ops)
    ops = list(h.ops)
    full = (1 << len(ops)) - 1
    dead = set()
    witness = []

    def search(placed, stack):
        if placed == full:
            return prune or is_legal_sequential(witness)
        if prune and (placed, stack) in dead:
            return False
        earliest_ret = min(op.ret_seq for i, op in enumerate(ops) if not placed & (1 << i))
        for i, op in enumerate(ops):
            if placed & (1 << i):
                continue
            if op.inv_seq > earliest_ret:
                # ops are sorted by invocation, none of the rest is minimal
                break
            following = _step(stack, op) if prune else stack
            if following is None:
                continue
            witness.append(op)
            if search(placed | (1 << i), following):
                return True
            witness.pop()
        if prune:
            dead.add((placed, stack))
        return False

    if not search(0, ()):
        LOGGER.debug('oracle: no linearization for %r' % h)
        return Verdict.violated(Violation(
            'oracle', (), 'no legal sequential ordering of the %d operations preserves happened-before' % len(ops)
        ), warnings=h.warnings)

    if not is_legal_sequential(witness) or not is_linear_extension(witness, happened_before(h)):
        raise InternalInvariantBroken('oracle produced an invalid witness: %s' % ' '.join(o.op for o in witness))
    return Verdict.linearizable(witness, warnings=h.warnings)
