"""Row-transfer sampling of the spin-1/2 model in the quadrant.

One path enters from the left edge of every row; a vertical arrow crossing
a vertex continues straight with probability b1, a horizontal one with
probability b2, and the doubly occupied or empty vertices are forced. The
two free probabilities coincide with the stochastic rows of the general
model at s^2 = 1/q, which is what the law-equality tests pin down.
"""

import numpy as np

from ..exactcore import ONE, ZERO, as_exact
from ..weights import RegimeError
from ._backend import CutTable

__all__ = ["QuadrantSampler", "step_six_vertex_quadrant", "sample_quadrant_grid"]


def _probability(value, name):
    p = as_exact(value)
    if not ZERO <= p <= ONE:
        raise RegimeError(f"{name} must be a probability in [0, 1]")
    return p


class QuadrantSampler:
    """Samples rows of the quadrant model at fixed (b1, b2).

    b1 is the straight-through probability of a lone vertical arrow, b2 of a
    lone horizontal arrow. Values may be given as exact rationals or strings;
    floats are rejected upstream to keep the sampled law unambiguous.
    """

    def __init__(self, b1, b2):
        b1 = _probability(b1, "b1")
        b2 = _probability(b2, "b2")
        self.b1 = b1
        self.b2 = b2
        one = ONE
        self._vertical = CutTable(
            [(b1.numerator, b1.denominator),
             ((one - b1).numerator, (one - b1).denominator)]
        )
        self._horizontal = CutTable(
            [(b2.numerator, b2.denominator),
             ((one - b2).numerator, (one - b2).denominator)]
        )

    def step(self, row_state, stream, trace=None):
        """Transfer one row: a path enters at the left edge.

        row_state is a sequence of 0/1 vertical occupancies over columns
        1..width. Returns (new_row_state as bytes, exited) where exited is 1
        when the entering path leaves through the right edge of the window.
        Pass a list as `trace` to collect the (i1, j1, i2, j2) of every
        vertex, e.g. for conservation audits.
        """
        out = bytearray(row_state)
        h = 1
        for x in range(len(out)):
            v = out[x]
            if v == h:
                # (0,0) and (1,1) vertices are forced and consume no randomness
                i2, j2 = v, h
            elif v:
                if self._vertical.sample(stream) == 0:
                    i2, j2 = 1, 0
                else:
                    out[x] = 0
                    i2, j2 = 0, 1
            else:
                if self._horizontal.sample(stream) == 0:
                    i2, j2 = 0, 1
                else:
                    out[x] = 1
                    i2, j2 = 1, 0
            if trace is not None:
                trace.append((v, h, i2, j2))
            h = j2
        return bytes(out), h


def step_six_vertex_quadrant(row_state, y, b1, b2, stream):
    """Single-row convenience wrapper; y is the row index (the model is
    homogeneous, so it only matters for bookkeeping)."""
    del y
    return QuadrantSampler(b1, b2).step(row_state, stream)


def sample_quadrant_grid(b1, b2, size, stream, trace=None):
    """Sample a size x size corner and return the height grid.

    Entry [y-1, x-1] is the number of paths passing through or to the right
    of column x after y rows, including paths that already left the window.
    """
    sampler = QuadrantSampler(b1, b2)
    row = bytes(size)
    exited = 0
    grid = np.zeros((size, size), dtype=np.int64)
    for y in range(size):
        row, out = sampler.step(row, stream, trace)
        exited += out
        counts = np.cumsum(np.frombuffer(row, dtype=np.uint8)[::-1])[::-1]
        grid[y] = counts.astype(np.int64) + exited
    return grid
