from dataclasses import dataclass, field

LINEARIZABLE = 'LINEARIZABLE'
VIOLATION = 'VIOLATION'


@dataclass(frozen=True)
class Violation:
    condition: str
    ops: tuple = ()
    reason: str = ''
    pop_index: int = None

    def __str__(self):
        return '%s: %s' % (self.condition, self.reason)


@dataclass(frozen=True)
class Verdict:
    result: str
    witness: tuple = ()
    violation: Violation = None
    warnings: tuple = field(default=())

    @classmethod
    def linearizable(cls, witness, warnings=()):
        return cls(LINEARIZABLE, witness=tuple(witness), warnings=tuple(warnings))

    @classmethod
    def violated(cls, violation, warnings=()):
        return cls(VIOLATION, violation=violation, warnings=tuple(warnings))

    @property
    def ok(self):
        return self.result == LINEARIZABLE

    @property
    def failed_condition(self):
        return self.violation.condition if self.violation else None

    @property
    def pop_index(self):
        return self.violation.pop_index if self.violation else None

    @property
    def witness_ids(self):
        return tuple(op.op for op in self.witness)

    def as_dict(self):
        return {
            'result': self.result,
            'failed_condition': self.failed_condition,
            'pop_index': self.pop_index,
            'ops': list(self.violation.ops) if self.violation else [],
            'reason': self.violation.reason if self.violation else '',
            'witness': list(self.witness_ids),
            'warnings': list(self.warnings),
        }
