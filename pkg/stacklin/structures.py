class SegmentTree:
    """Point updates and range folds over a fixed array of comparable values.

    ``combine`` must be associative and commutative (min and max here); values
    are usually ``(key, index)`` tuples so folds also report where they came from.
    """

    def __init__(self, values, combine, identity):
        self.combine = combine
        self.identity = identity
        self.size = 1
        while self.size < len(values):
            self.size *= 2
        self.tree = [identity] * (2 * self.size)
        self.tree[self.size:self.size + len(values)] = values
        for i in range(self.size - 1, 0, -1):
            self.tree[i] = combine(self.tree[2 * i], self.tree[2 * i + 1])

    def __getitem__(self, index):
        return self.tree[self.size + index]

    def update(self, index, value):
        i = self.size + index
        self.tree[i] = value
        i //= 2
        while i:
            self.tree[i] = self.combine(self.tree[2 * i], self.tree[2 * i + 1])
            i //= 2

    def query(self, lo, hi):
        """Fold of positions [lo, hi)."""
        result = self.identity
        lo += self.size
        hi += self.size
        while lo < hi:
            if lo & 1:
                result = self.combine(result, self.tree[lo])
                lo += 1
            if hi & 1:
                hi -= 1
                result = self.combine(result, self.tree[hi])
            lo //= 2
            hi //= 2
        return result

    def rightmost(self, predicate):
        """Largest index whose value satisfies ``predicate``, or -1.

        ``predicate`` must hold for a fold iff it holds for one of its parts.
        """
        if not predicate(self.tree[1]):
            return -1
        i = 1
        while i < self.size:
            i = 2 * i + 1 if predicate(self.tree[2 * i + 1]) else 2 * i
        return i - self.size

    def leftmost(self, predicate):
        """Smallest index whose value satisfies ``predicate``, or -1."""
        if not predicate(self.tree[1]):
            return -1
        i = 1
        while i < self.size:
            i = 2 * i if predicate(self.tree[2 * i]) else 2 * i + 1
        return i - self.size
