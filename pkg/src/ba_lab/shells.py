"""Enumeration of integer vectors by sup-norm shells.

Every scan in the package walks candidates shell by shell (sup norm
0, 1, 2, ...) and lexicographically inside a shell, so minima found by
a first-strict-improvement scan have a deterministic witness.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator, Tuple


def shell_vectors(n: int, s: int) -> Iterator[Tuple[int, ...]]:
    """Integer vectors in Z^n with sup norm exactly s, lexicographic order."""
    if n < 1:
        raise ValueError("n must be positive")
    if s < 0:
        raise ValueError("shell index must be nonnegative")
    if s == 0:
        yield (0,) * n
        return
    if n == 1:
        yield (-s,)
        yield (s,)
        return
    for q in product(range(-s, s + 1), repeat=n):
        if max(abs(c) for c in q) == s:
            yield q


def shell_size(n: int, s: int) -> int:
    """Number of vectors in the shell of sup norm s."""
    if s == 0:
        return 1
    return (2 * s + 1) ** n - (2 * s - 1) ** n


def annulus_size(n: int, lo: int, hi: int) -> int:
    """Number of integer vectors with lo <= sup norm <= hi."""
    if lo > hi:
        return 0
    below = (2 * lo - 1) ** n if lo > 0 else 0
    return (2 * hi + 1) ** n - below
