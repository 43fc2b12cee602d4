"""Small example histories in the file format, for tests and ``stacklin corpus``."""
from stacklin.history import parse_history

# push(x) precedes the pop, push(y) overlaps it; the pop returns x
OVERLAP_X = """stacklin-history v1
inv 1 t1 push x
ret 1 t1
inv 2 t1 push y
inv 3 t2 pop
ret 2 t1
ret 3 t2 x
rm 3 1
"""

# same layout, the pop returns y and forms an elimination pair with push(y)
OVERLAP_Y = """stacklin-history v1
inv 1 t1 push x
ret 1 t1
inv 2 t1 push y
inv 3 t2 pop
ret 2 t1
ret 3 t2 y
rm 3 1
"""

# five threads; removal order pop(z), pop(x), pop(y)
FIVE_THREADS = """stacklin-history v1
inv 1 t1 push x
ret 1 t1
inv 2 t5 pop
inv 3 t2 push y
inv 4 t3 push z
ret 4 t3
inv 5 t4 pop
ret 5 t4 z
ret 3 t2
inv 6 t3 pop
ret 6 t3 y
ret 2 t5 x
rm 5 1
rm 2 2
rm 6 3
"""

# the recorded removal order fails condition 1, the order pop(y), pop(x) passes
REORDER = """stacklin-history v1
inv 1 t1 push x
ret 1 t1
inv 2 t1 push y
ret 2 t1
inv 3 t2 pop
inv 4 t3 pop
ret 4 t3 y
ret 3 t2 x
rm 3 1
rm 4 2
"""

FIFO = """stacklin-history v1
inv 1 t1 push a
ret 1 t1
inv 2 t1 push b
ret 2 t1
inv 3 t1 pop
ret 3 t1 a
rm 3 1
"""

EMPTY_AFTER_PUSH = """stacklin-history v1
inv 1 t1 push a
ret 1 t1
inv 2 t2 pop
ret 2 t2 empty
rm 2 1
"""

# linearizable, but the recorded order puts the empty pop after pop(a)
# while push(b) is still in the stack and precedes push(a)
COND2B = """stacklin-history v1
inv 1 t3 pop
inv 2 t1 push b
ret 2 t1
inv 3 t1 push a
ret 3 t1
inv 4 t1 pop
ret 4 t1 a
ret 1 t3 empty
rm 4 1
rm 1 2
"""

UNPUSHED = """stacklin-history v1
inv 1 t1 push a
ret 1 t1
inv 2 t2 pop
ret 2 t2 q
rm 2 1
"""

CORPUS = {
    'overlap-x': OVERLAP_X,
    'overlap-y': OVERLAP_Y,
    'five-threads': FIVE_THREADS,
    'reorder': REORDER,
    'fifo': FIFO,
    'empty-after-push': EMPTY_AFTER_PUSH,
    'cond2b': COND2B,
    'unpushed': UNPUSHED,
}


def names():
    return sorted(CORPUS)


def load(name):
    return parse_history(CORPUS[name])
