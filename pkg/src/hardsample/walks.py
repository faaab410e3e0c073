"""Numba kernel for random-walk commute-time estimation."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def commute_walks(indptr, indices, start, target, tol, max_walks, min_walks, seed):
    """Simulate round-trip random walks start -> target -> start.

    Returns (mean commute steps, standard error of the mean, walks run).
    Stops once the running-mean update drops below tol (after min_walks)
    or max_walks is reached. Caller guarantees connectivity.
    """
    np.random.seed(seed)
    mean = 0.0
    m2 = 0.0
    n = 0
    while n < max_walks:
        steps = 0
        pos = start
        while pos != target:
            lo = indptr[pos]
            deg = indptr[pos + 1] - lo
            pos = indices[lo + int(np.random.random() * deg)]
            steps += 1
        while pos != start:
            lo = indptr[pos]
            deg = indptr[pos + 1] - lo
            pos = indices[lo + int(np.random.random() * deg)]
            steps += 1
        n += 1
        delta = steps - mean
        update = delta / n
        mean += update
        m2 += delta * (steps - mean)
        if n >= min_walks and abs(update) < tol:
            break
    if n > 1:
        stderr = np.sqrt(m2 / (n - 1) / n)
    else:
        stderr = 0.0
    return mean, stderr, n
