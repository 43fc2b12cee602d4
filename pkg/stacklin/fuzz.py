"""Oracle-equivalence campaign: the checker pipeline against exhaustive search."""
import collections
import concurrent.futures
import itertools
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured

from stacklin.checker import DEFAULT_MAX_SEARCH_POPS, RECORDED, SEARCH, verify
from stacklin.exceptions import StacklinError
from stacklin.history import EMPTY, INV, POP, PUSH, RET, Event, History, emit_history
from stacklin.oracle import DEFAULT_MAX_OPS, oracle_check
from stacklin.stacks.harness import record_stress

LOGGER = logging.getLogger(__name__)

IMPLS = ('treiber', 'hsy', 'ts')
MUTATIONS = ('value-swap', 'rank-shuffle', 'fifo-inject')

# every RECORDER_EVERY-th trial replays a small recorded run instead of a synthetic layout
RECORDER_EVERY = 10


@dataclass(frozen=True)
class FuzzConfig:
    trials: int = 10000
    max_ops: int = 8
    seed: int = 0
    mutate: bool = False
    workers: int = 1
    exhaustive: int = 0
    out_dir: str = None
    oracle_max_ops: int = DEFAULT_MAX_OPS
    max_search_pops: int = DEFAULT_MAX_SEARCH_POPS
    options: object = None

    def validate(self):
        if self.max_ops > self.oracle_max_ops:
            raise ImproperlyConfigured('fuzz max_ops (%d) exceeds the oracle bound (%d)' % (
                self.max_ops, self.oracle_max_ops))
        if self.max_ops > self.max_search_pops:
            raise ImproperlyConfigured('fuzz max_ops (%d) exceeds the pop-order search bound (%d)' % (
                self.max_ops, self.max_search_pops))
        if self.trials < 0 or self.max_ops < 1 or self.workers < 1:
            raise ImproperlyConfigured('fuzz needs trials >= 0, max_ops >= 1 and workers >= 1')
        if not 0 <= self.exhaustive <= 4:
            raise ImproperlyConfigured('exhaustive layouts are enumerated for at most 4 operations')


@dataclass
class FuzzReport:
    trials: int = 0
    agreements: int = 0
    disagreements: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    violations: collections.Counter = field(default_factory=collections.Counter)
    mutants: int = 0
    oracle_rejections: int = 0
    checker_rejections: int = 0
    false_accepts: int = 0

    def merge(self, other):
        self.trials += other.trials
        self.agreements += other.agreements
        self.disagreements.extend(other.disagreements)
        self.errors.extend(other.errors)
        self.violations.update(other.violations)
        self.mutants += other.mutants
        self.oracle_rejections += other.oracle_rejections
        self.checker_rejections += other.checker_rejections
        self.false_accepts += other.false_accepts
        return self

    def as_dict(self):
        return {
            'trials': self.trials,
            'agreements': self.agreements,
            'disagreements': sorted(self.disagreements),
            'errors': sorted(self.errors),
            'violations': dict(sorted(self.violations.items())),
            'mutants': self.mutants,
            'oracle_rejections': self.oracle_rejections,
            'checker_rejections': self.checker_rejections,
            'false_accepts': self.false_accepts,
        }


def _events(layout, methods, values):
    """Events for ops laid out on a timeline; ``layout`` lists each op index twice."""
    events = []
    seen = set()
    for seq, i in enumerate(layout, start=1):
        op, thread = str(i + 1), 't%d' % (i + 1)
        if i not in seen:
            seen.add(i)
            value = values[i] if methods[i] == PUSH else None
            events.append(Event(seq=seq, thread=thread, kind=INV, op=op, method=methods[i], value=value))
        else:
            value = values[i] if methods[i] == POP else None
            events.append(Event(seq=seq, thread=thread, kind=RET, op=op, value=value))
    return events


def synthetic_history(rng, n, linearizable=None):
    """A random interval layout of ``n`` operations, one thread each.

    Pop results come from replaying a stack at a random point inside each
    interval (always linearizable) or are drawn at random.
    """
    if linearizable is None:
        linearizable = rng.random() < 0.5
    layout = [i for i in range(n) for _ in range(2)]
    rng.shuffle(layout)
    methods = [PUSH if rng.random() < 0.5 else POP for _ in range(n)]
    values = {i: 'v%d' % (i + 1) for i in range(n) if methods[i] == PUSH}
    if linearizable:
        first = {}
        last = {}
        for position, i in enumerate(layout):
            first.setdefault(i, position)
            last[i] = position
        points = sorted(range(n), key=lambda i: rng.uniform(first[i], last[i]))
        stack = []
        for i in points:
            if methods[i] == PUSH:
                stack.append(values[i])
            else:
                values[i] = stack.pop() if stack else EMPTY
    else:
        choices = [values[i] for i in range(n) if methods[i] == PUSH] + [EMPTY]
        for i in range(n):
            if methods[i] == POP:
                values[i] = rng.choice(choices)
    return History(_events(layout, methods, values))


def _layouts(n):
    def extend(layout, opened, next_label):
        if len(layout) == 2 * n:
            yield tuple(layout)
            return
        if next_label < n:
            yield from extend(layout + [next_label], opened | {next_label}, next_label + 1)
        for i in sorted(opened):
            yield from extend(layout + [i], opened - {i}, next_label)

    yield from extend([], frozenset(), 0)


def _assignments(n):
    for mask in range(1 << n):
        methods = [POP if mask & (1 << i) else PUSH for i in range(n)]
        pushed = ['v%d' % (i + 1) for i in range(n) if methods[i] == PUSH]
        pops = [i for i in range(n) if methods[i] == POP]
        for chosen in itertools.product(pushed + [EMPTY], repeat=len(pops)):
            values = {i: 'v%d' % (i + 1) for i in range(n) if methods[i] == PUSH}
            values.update(zip(pops, chosen))
            yield methods, values


def exhaustive_histories(n):
    """Every layout of ``n`` operations labelled by invocation order, with every
    push/pop assignment and every choice of pop results."""
    for layout in _layouts(n):
        for methods, values in _assignments(n):
            yield History(_events(layout, methods, values))


def value_swap(h, rng):
    pops = [pop for pop in h.pops if not pop.returned_empty]
    if len(pops) >= 2:
        a, b = rng.sample(pops, 2)
        if a.value == b.value:
            return None
        swapped = {a.op: b.value, b.op: a.value}
    elif pops:
        others = [push.value for push in h.pushes if push.value != pops[0].value]
        if not others:
            return None
        swapped = {pops[0].op: rng.choice(others)}
    else:
        return None
    events = [
        Event(e.seq, e.thread, e.kind, e.op, e.method, swapped[e.op])
        if e.kind == RET and e.op in swapped else e
        for e in h.events
    ]
    return History(events, removal_order=h.removal_order, eliminated=h.eliminated)


def rank_shuffle(h, rng):
    if len(h.removal_order) < 2:
        return None
    ops = list(h.removal_order)
    ranks = [h.removal_order[op] for op in ops]
    rng.shuffle(ranks)
    return History(h.events, removal_order=dict(zip(ops, ranks)), eliminated=h.eliminated)


def fifo_inject(h, rng=None):
    """Append push(a), push(b), pop() -> a on a fresh thread after everything else."""
    start = max((e.seq for e in h.events), default=0) + 1
    used = {op.op for op in h.ops}
    ids = []
    k = len(h.ops)
    while len(ids) < 3:
        k += 1
        if str(k) not in used:
            ids.append(str(k))
    thread = 'tfifo'
    a, b = 'fifo%sa' % ids[0], 'fifo%sb' % ids[0]
    extra = [
        Event(start, thread, INV, ids[0], PUSH, a), Event(start + 1, thread, RET, ids[0]),
        Event(start + 2, thread, INV, ids[1], PUSH, b), Event(start + 3, thread, RET, ids[1]),
        Event(start + 4, thread, INV, ids[2], POP), Event(start + 5, thread, RET, ids[2], value=a),
    ]
    removal_order = dict(h.removal_order)
    removal_order[ids[2]] = max(removal_order.values(), default=0) + 1
    return History(list(h.events) + extra, removal_order=removal_order, eliminated=h.eliminated)


MUTATORS = {
    'value-swap': value_swap,
    'rank-shuffle': rank_shuffle,
    'fifo-inject': fifo_inject,
}


def _persist(config, h, name):
    if config.out_dir is None:
        return name
    path = Path(config.out_dir) / ('%s.hist' % name)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_history(h))
    return str(path)


def _failed(config, h, name, error, report):
    LOGGER.warning('%s: checker failed with %s: %s' % (name, type(error).__name__, error))
    report.errors.append(_persist(config, h, name))


def compare(config, h, name, report):
    expected = oracle_check(h, max_ops=config.oracle_max_ops)
    report.trials += 1
    try:
        verdict = verify(h, pop_order=SEARCH, max_search_pops=config.max_search_pops)
    except StacklinError as e:
        _failed(config, h, name, e, report)
        return
    if not verdict.ok:
        report.violations[verdict.failed_condition] += 1
    if verdict.ok == expected.ok:
        report.agreements += 1
        return
    LOGGER.warning('%s: checker says %s, oracle says %s' % (name, verdict.result, expected.result))
    report.disagreements.append(_persist(config, h, name))


def _mutate(config, h, rng, name, report):
    for mutation in MUTATIONS:
        mutant = MUTATORS[mutation](h, rng)
        if mutant is None:
            continue
        expected = oracle_check(mutant, max_ops=config.oracle_max_ops + 3)
        try:
            pop_order = RECORDED if mutation == 'rank-shuffle' else SEARCH
            verdict = verify(mutant, pop_order=pop_order, max_search_pops=config.max_search_pops + 3)
        except StacklinError as e:
            report.mutants += 1
            _failed(config, mutant, '%s-%s' % (name, mutation), e, report)
            continue
        report.mutants += 1
        if not expected.ok:
            report.oracle_rejections += 1
        if not verdict.ok:
            report.checker_rejections += 1
        elif not expected.ok:
            report.false_accepts += 1
            LOGGER.warning('%s %s: checker accepted a mutant the oracle rejects' % (name, mutation))
            report.disagreements.append(_persist(config, mutant, '%s-%s' % (name, mutation)))


def run_trial(config, k):
    """One seeded trial; returns its own partial report."""
    rng = random.Random(config.seed * 1000003 + k)
    report = FuzzReport()
    name = 'trial-%d-%d' % (config.seed, k)
    if k % RECORDER_EVERY == RECORDER_EVERY - 1:
        impl = IMPLS[(k // RECORDER_EVERY) % len(IMPLS)]
        h = record_stress(impl, threads=2, ops=max(1, config.max_ops // 2), seed=rng.randrange(1 << 30),
                          options=config.options)
        name = '%s-%s' % (name, impl)
    else:
        h = synthetic_history(rng, rng.randint(1, config.max_ops))
    compare(config, h, name, report)
    if config.mutate:
        _mutate(config, h, rng, name, report)
    return report


def fuzz(config):
    config.validate()
    report = FuzzReport()
    for n in range(1, config.exhaustive + 1):
        for index, h in enumerate(exhaustive_histories(n)):
            compare(config, h, 'exhaustive-%d-%d' % (n, index), report)

    if config.workers == 1:
        for k in range(config.trials):
            report.merge(run_trial(config, k))
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as executor:
            for partial in executor.map(lambda k: run_trial(config, k), range(config.trials)):
                report.merge(partial)
    LOGGER.info('fuzz: %d trials, %d agreements, %d disagreements, %d errors, %d mutants' % (
        report.trials, report.agreements, len(report.disagreements), len(report.errors), report.mutants))
    return report
