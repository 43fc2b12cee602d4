from stacklin.history import POP, PUSH
from stacklin.stacks.recorder import NullRecorder


class RecordedStack:
    """Wraps ``_push``/``_pop`` of a concrete stack with recorder events."""

    def __init__(self, recorder=None, jitter=0.0):
        self.recorder = recorder if recorder is not None else NullRecorder()
        self.jitter = jitter

    @classmethod
    def from_options(cls, options, recorder=None, threads=1):
        return cls(recorder=recorder, jitter=options.jitter)

    def push(self, value):
        op = self.recorder.invoke(PUSH, value)
        self._push(value)
        self.recorder.respond(op)

    def pop(self):
        op = self.recorder.invoke(POP)
        value = self._pop()
        self.recorder.respond(op, value)
        return value

    def _push(self, value):
        raise NotImplementedError

    def _pop(self):
        raise NotImplementedError
