"""Compare-and-set cells for the recorded stacks.

Every atomic step takes the module-wide ``LOCK``, so a successful
compare-and-set and whatever it reports to the recorder (a removal rank,
an elimination marker) happen as one step. ``LOCK`` is reentrant for that
reason.
"""
import random
import threading
import time

LOCK = threading.RLock()


class AtomicReference:
    def __init__(self, value=None):
        self._value = value

    def get(self):
        with LOCK:
            return self._value

    def set(self, value):
        with LOCK:
            self._value = value

    def compare_and_set(self, expected, value, on_success=None):
        """Replace the value if it still is ``expected`` (identity); run ``on_success`` in the same step."""
        with LOCK:
            if self._value is not expected:
                return False
            self._value = value
            if on_success is not None:
                on_success()
            return True


class AtomicStampedReference:
    """A reference paired with a stamp, compared and swapped together."""

    def __init__(self, value=None, stamp=0):
        self._value = value
        self._stamp = stamp

    def get(self):
        with LOCK:
            return self._value, self._stamp

    def set(self, value, stamp):
        with LOCK:
            self._value = value
            self._stamp = stamp

    def compare_and_set(self, expected, value, expected_stamp, stamp, on_success=None):
        with LOCK:
            if self._value is not expected or self._stamp != expected_stamp:
                return False
            self._value = value
            self._stamp = stamp
            if on_success is not None:
                on_success()
            return True


class AtomicCounter:
    def __init__(self, value=0):
        self._value = value

    def fetch_inc(self):
        with LOCK:
            value = self._value
            self._value += 1
            return value

    def get(self):
        with LOCK:
            return self._value


def interleave(probability):
    """Yield the interpreter with the given probability to shake up thread schedules."""
    if probability and random.random() < probability:
        time.sleep(0)
