"""Process-wide generator of fresh dependent-factor identifiers."""
from __future__ import annotations

import itertools
import threading

import numpy as np


class IdGenerator:
    """Monotone counter handing out identifiers that are never reused.

    Every identifier returned is strictly larger than all identifiers returned
    before by the same generator, which makes uniqueness hold by construction.
    """

    def __init__(self, start: int = 1):
        if start < 1:
            raise ValueError("identifiers must be positive")
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def __call__(self, m: int) -> np.ndarray:
        if m < 0:
            raise ValueError(f"cannot generate {m} identifiers")
        with self._lock:
            ids = [next(self._counter) for _ in range(m)]
        return np.array(ids, dtype=np.int64)


_GLOBAL = IdGenerator()


def unique_id(m: int) -> np.ndarray:
    """Return ``m`` fresh identifiers from the process-wide generator."""
    return _GLOBAL(m)
