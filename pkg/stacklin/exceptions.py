class StacklinError(Exception):
    pass


class HistoryError(StacklinError):
    pass


class MalformedLine(HistoryError):
    def __init__(self, line_no, text, problem='malformed line'):
        self.line_no = line_no
        self.text = text
        super().__init__('%s at line %d: %r' % (problem, line_no, text))


class DuplicateOpId(HistoryError):
    def __init__(self, op, line_no):
        self.op = op
        self.line_no = line_no
        super().__init__('operation id %s invoked twice (line %d)' % (op, line_no))


class RetWithoutInv(HistoryError):
    def __init__(self, op, line_no):
        self.op = op
        self.line_no = line_no
        super().__init__('response for operation %s has no matching invocation (line %d)' % (op, line_no))


class DuplicatePushValue(HistoryError):
    def __init__(self, value, op, line_no):
        self.value = value
        self.op = op
        self.line_no = line_no
        super().__init__('value %s pushed twice, again by operation %s (line %d)' % (value, op, line_no))


class PrecedenceCycle(StacklinError):
    def __init__(self, earlier, later):
        self.ops = (earlier, later)
        super().__init__('sequence does not preserve happened-before: %s precedes %s' % (later, earlier))


class MatchError(StacklinError):
    pass


class UnmatchedPopValue(MatchError):
    def __init__(self, pop, value):
        self.pop = pop
        self.value = value
        super().__init__('pop %s returned %s, which no push inserted' % (pop, value))


class PopOrderError(StacklinError):
    pass


class MissingRemovalRank(PopOrderError):
    def __init__(self, pops):
        self.pops = tuple(pops)
        super().__init__('no removal rank recorded for pop(s) %s' % ', '.join(self.pops))


class NotALinearExtension(PopOrderError):
    def __init__(self, earlier, later):
        self.ops = (earlier, later)
        super().__init__('removal order puts %s before %s, but %s happened before %s' % (
            earlier, later, later, earlier))


class SearchBoundExceeded(StacklinError):
    def __init__(self, size, bound, what='operations'):
        self.size = size
        self.bound = bound
        super().__init__('%d %s exceed the search bound of %d' % (size, what, bound))


class InternalInvariantBroken(StacklinError):
    pass


class HarnessTimeout(StacklinError):
    def __init__(self, threads, timeout):
        self.threads = tuple(threads)
        self.timeout = timeout
        super().__init__('threads %s did not quiesce within %.1f seconds' % (', '.join(self.threads), timeout))
