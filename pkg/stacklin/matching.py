import logging
from collections.abc import Mapping
from types import MappingProxyType

from stacklin.exceptions import UnmatchedPopValue
from stacklin.history import EMPTY
from stacklin.verdicts import Violation

LOGGER = logging.getLogger(__name__)


class MatchMap(Mapping):
    """Safe mapping from pop ids to the id of the push they removed, or EMPTY."""

    def __init__(self, assignment):
        self.assignment = MappingProxyType(dict(assignment))

    def __getitem__(self, pop_id):
        return self.assignment[pop_id]

    def __iter__(self):
        return iter(self.assignment)

    def __len__(self):
        return len(self.assignment)

    def pop_of(self):
        return {push: pop for pop, push in self.assignment.items() if push is not EMPTY}

    def restrict(self, pop_ids):
        pop_ids = set(pop_ids)
        return MatchMap({pop: push for pop, push in self.assignment.items() if pop in pop_ids})

    def __repr__(self):
        return '<MatchMap: %s>' % ', '.join('%s->%s' % item for item in sorted(self.assignment.items()))


def derive_match(h):
    pushed = {push.value: push.op for push in h.pushes}
    assignment = {}
    for pop in h.pops:
        if pop.returned_empty:
            assignment[pop.op] = EMPTY
        elif pop.value in pushed:
            assignment[pop.op] = pushed[pop.value]
        else:
            raise UnmatchedPopValue(pop.op, pop.value)
    return MatchMap(assignment)


def validate_match(h, m):
    """Return None if ``m`` is a safe mapping for ``h``, else the first violated clause."""
    removed_by = {}
    for pop in h.pops:
        if pop.op not in m:
            return Violation('clause-1', (pop.op,), 'pop %s is not mapped' % pop.op)
        push_id = m[pop.op]
        if pop.returned_empty or push_id is EMPTY:
            if pop.returned_empty and push_id is EMPTY:
                continue
            return Violation('clause-2', (pop.op,) if push_id is EMPTY else (pop.op, push_id),
                             'pop %s returned %s but is mapped to %s' % (pop.op, pop.value, push_id))
        if push_id not in h or not h.op(push_id).is_push or h.op(push_id).value != pop.value:
            return Violation('clause-1', (pop.op, push_id),
                             'pop %s returned %s, not the value inserted by %s' % (pop.op, pop.value, push_id))
        if push_id in removed_by:
            return Violation('clause-3', (removed_by[push_id], pop.op, push_id),
                             'pops %s and %s both removed the value of %s' % (removed_by[push_id], pop.op, push_id))
        removed_by[push_id] = pop.op
    return None
