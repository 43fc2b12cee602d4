import csv
import logging
import time
from dataclasses import dataclass

from stacklin.checker import RECORDED, verify
from stacklin.oracle import DEFAULT_MAX_OPS, oracle_check
from stacklin.stacks.harness import record_stress

LOGGER = logging.getLogger(__name__)

SKIPPED = 'SKIPPED'
COLUMNS = ('size', 'operations', 'checker_seconds', 'oracle_seconds', 'result')


@dataclass(frozen=True)
class BenchRow:
    size: int
    operations: int
    checker_seconds: float
    oracle_seconds: float
    result: str

    def as_row(self):
        oracle = SKIPPED if self.oracle_seconds is None else '%.6f' % self.oracle_seconds
        return self.size, self.operations, '%.6f' % self.checker_seconds, oracle, self.result


def bench(impl, sizes, seed=0, threads=2, oracle_max_ops=DEFAULT_MAX_OPS, options=None):
    """Time the checker and the oracle on recorded histories of growing size."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError('bench sizes must be ascending: %s' % sizes)
    rows = []
    for size in sizes:
        h = record_stress(impl, threads=threads, ops=max(1, size // threads), seed=seed, options=options)
        started = time.perf_counter()
        verdict = verify(h, pop_order=RECORDED)
        checker_seconds = time.perf_counter() - started
        oracle_seconds = None
        if len(h) <= oracle_max_ops:
            started = time.perf_counter()
            oracle_check(h, max_ops=oracle_max_ops)
            oracle_seconds = time.perf_counter() - started
        LOGGER.info('bench %s size %d: checker %.3fs, oracle %s' % (
            impl, size, checker_seconds, SKIPPED if oracle_seconds is None else '%.3fs' % oracle_seconds))
        rows.append(BenchRow(size, len(h), checker_seconds, oracle_seconds, verdict.result))
    return rows


def write_table(rows, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row.as_row())
