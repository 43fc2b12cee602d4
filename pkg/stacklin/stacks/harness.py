import copy
import logging
import random
import threading
import time
from dataclasses import dataclass, field

from stacklin.conf import get_options
from stacklin.exceptions import HarnessTimeout
from stacklin.history import POP, PUSH
from stacklin.stacks import get_stack
from stacklin.stacks.recorder import Recorder

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class StressRun:
    history: object
    timestamps: dict = field(default_factory=dict)
    schedules: tuple = ()


def make_schedules(threads, ops, seed, pop_ratio=0.5):
    """Per-thread operation lists; pushed values are ``t<thread>v<counter>``."""
    rng = random.Random(seed)
    schedules = []
    for thread in range(threads):
        schedule = []
        for k in range(ops):
            if rng.random() < pop_ratio:
                schedule.append((POP, None))
            else:
                schedule.append((PUSH, 't%dv%d' % (thread, k)))
        schedules.append(tuple(schedule))
    return tuple(schedules)


def run_stress(impl, threads, ops, seed=0, pop_ratio=0.5, timeout=None, jitter=None, options=None, stack=None):
    if threads < 1 or ops < 0:
        raise ValueError('need at least one thread and a non-negative operation count')
    if options is None:
        options = get_options()
    if timeout is None:
        timeout = options.harness_timeout
    if jitter is not None:
        options = copy.copy(options)
        options.jitter = jitter

    schedules = make_schedules(threads, ops, seed, pop_ratio)
    recorder = Recorder()
    if stack is None:
        stack = get_stack(impl, recorder=recorder, threads=threads, options=options)
    else:
        stack.recorder = recorder
    barrier = threading.Barrier(threads)
    errors = []

    def work(schedule):
        try:
            barrier.wait(timeout)
            for method, value in schedule:
                if method == PUSH:
                    stack.push(value)
                else:
                    stack.pop()
        except Exception as e:
            LOGGER.exception('worker %s failed' % threading.current_thread().name)
            errors.append(e)

    workers = [
        threading.Thread(target=work, args=(schedule,), name='t%d' % i, daemon=True)
        for i, schedule in enumerate(schedules)
    ]
    LOGGER.info('stress %s: %d threads x %d ops, seed %s' % (impl, threads, ops, seed))
    deadline = time.monotonic() + timeout
    for worker in workers:
        worker.start()
    for worker in workers:
        worker.join(max(0.0, deadline - time.monotonic()))
    stuck = [worker.name for worker in workers if worker.is_alive()]
    if stuck:
        raise HarnessTimeout(stuck, timeout)
    if errors:
        raise errors[0]
    return StressRun(
        history=recorder.history(),
        timestamps=dict(getattr(stack, 'timestamps', {})),
        schedules=schedules,
    )


def record_stress(impl, threads, ops, seed=0, pop_ratio=0.5, **kwargs):
    return run_stress(impl, threads, ops, seed=seed, pop_ratio=pop_ratio, **kwargs).history
