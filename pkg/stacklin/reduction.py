import logging
from dataclasses import dataclass

from stacklin.history import EMPTY, happened_before

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class EliminationPair:
    push: str
    pop: str


def find_elimination_pairs(h, m):
    """Pairs (push, pop) where pop returned push's value and the two overlap."""
    hb = happened_before(h)
    pairs = set()
    for pop in h.pops:
        push_id = m[pop.op]
        if push_id is EMPTY:
            continue
        if hb.interleaved(h.op(push_id), pop):
            pairs.add(EliminationPair(push=push_id, pop=pop.op))
    LOGGER.debug('found %d elimination pairs' % len(pairs))
    return frozenset(pairs)


def strip(h, pairs):
    if not pairs:
        return h
    removed = {pair.push for pair in pairs} | {pair.pop for pair in pairs}
    return h.restrict(op.op for op in h.ops if op.op not in removed)


def corroborate(h, pairs):
    """Compare the recorder's advisory elimination markers with the derived pairs."""
    warnings = []
    for pop_id in sorted(h.eliminated - {pair.pop for pair in pairs}, key=lambda op: h.op(op).inv_seq):
        message = 'pop %s is marked eliminated but is not part of an elimination pair' % pop_id
        LOGGER.warning(message)
        warnings.append(message)
    return warnings
