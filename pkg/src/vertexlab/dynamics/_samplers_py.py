"""Counter-based randomness and exact finite sampling, pure-Python reference.

The generator is Philox4x64-10: the state is a 256-bit counter (four 64-bit
words, little-endian) plus a 128-bit key, and every 256-bit output block is a
pure function of the two. Replica r of a run with master seed s uses the key
(s, r), so replicas are mutually independent streams and any point of any
trajectory can be regenerated from (master_seed, replica, block index).

Finite distributions with exact rational weights are sampled by comparing a
lazily extended dyadic uniform against the cumulative weights: the first
refinement takes 128 bits, and further 64-bit words are appended only while
the dyadic interval [K/2^B, (K+1)/2^B) still straddles a cumulative cut.
Termination is almost sure and the sampled law is exactly the requested one;
no floating-point number is ever formed on this path.

The compiled twin in _samplers_cy.pyx implements the same word-consumption
protocol, so trajectories are bit-identical across backends.
"""

import math
from bisect import bisect_right
from fractions import Fraction

__all__ = ["PhiloxStream", "CutTable", "philox4x64_block", "BACKEND_NAME"]

BACKEND_NAME = "python"

PHILOX_M0 = 0xD2E7470EE14C6C93
PHILOX_M1 = 0xCA5A826395121157
PHILOX_W0 = 0x9E3779B97F4A7C15
PHILOX_W1 = 0xBB67AE8584CAA73B

_MASK64 = (1 << 64) - 1


def philox4x64_block(k0, k1, c0, c1, c2, c3):
    """One 10-round Philox4x64 block: four output words from counter and key."""
    x0, x1, x2, x3 = c0, c1, c2, c3
    for rnd in range(10):
        if rnd:
            k0 = (k0 + PHILOX_W0) & _MASK64
            k1 = (k1 + PHILOX_W1) & _MASK64
        p0 = PHILOX_M0 * x0
        p1 = PHILOX_M1 * x2
        x0 = (p1 >> 64) ^ x1 ^ k0
        x1 = p1 & _MASK64
        x2 = (p0 >> 64) ^ x3 ^ k1
        x3 = p0 & _MASK64
    return x0, x1, x2, x3


class PhiloxStream:
    """Deterministic word stream keyed by (master_seed, replica_index)."""

    __slots__ = ("_k0", "_k1", "_blocks", "_buf", "_pos")

    def __init__(self, master_seed, replica_index):
        master_seed = int(master_seed)
        replica_index = int(replica_index)
        if not 0 <= master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 bits")
        if not 0 <= replica_index <= _MASK64:
            raise ValueError("replica_index must fit in 64 bits")
        self._k0 = master_seed
        self._k1 = replica_index
        self._blocks = 0
        self._buf = (0, 0, 0, 0)
        self._pos = 4

    def next64(self):
        """Next 64-bit word."""
        if self._pos == 4:
            c = self._blocks
            self._buf = philox4x64_block(
                self._k0,
                self._k1,
                c & _MASK64,
                (c >> 64) & _MASK64,
                (c >> 128) & _MASK64,
                (c >> 192) & _MASK64,
            )
            self._blocks = c + 1
            self._pos = 0
        w = self._buf[self._pos]
        self._pos += 1
        return w

    def next_u128(self):
        """Next 128-bit integer; the earlier word supplies the high bits."""
        hi = self.next64()
        return (hi << 64) | self.next64()

    def uniform01(self):
        """Double in the open interval (0, 1); used only by the
        continuous-time models, which are statistical anyway."""
        return ((self.next64() >> 11) + 0.5) * 2.0**-53

    def exponential(self, rate):
        if rate <= 0:
            raise ValueError("exponential clocks need a positive rate")
        return -math.log(self.uniform01()) / rate

    @property
    def blocks_generated(self):
        return self._blocks


class CutTable:
    """Exact sampler for a finite distribution given by rational weights.

    Weights come in as (numerator, denominator) pairs with positive
    denominators; they must be nonnegative and sum to exactly 1. Outcomes are
    returned as indices into the weight list. A weight equal to 1 makes the
    draw deterministic and consumes no randomness; otherwise one draw costs
    one 128-bit read plus, with probability about 2^-128 per cut, further
    64-bit refinements.
    """

    __slots__ = ("_cuts", "_floors", "_exact", "_trivial", "_size")

    def __init__(self, weights):
        cuts = []
        total = Fraction(0)
        self._trivial = None
        for idx, (num, den) in enumerate(weights):
            w = Fraction(num, den)
            if w < 0:
                raise ValueError(f"negative weight at index {idx}")
            if w == 1:
                self._trivial = idx
            total += w
            cuts.append(total)
        if total != 1:
            raise ValueError("weights must sum to exactly 1")
        cuts.pop()  # the final cut is the constant 1
        while cuts and cuts[-1] == 1:
            cuts.pop()  # zero-weight tail cells are unreachable
        self._size = len(weights)
        self._cuts = [(c.numerator, c.denominator) for c in cuts]
        self._floors = [(n << 128) // d for n, d in self._cuts]
        self._exact = [(n << 128) % d == 0 for n, d in self._cuts]

    def __len__(self):
        return self._size

    def sample(self, stream):
        if self._trivial is not None:
            return self._trivial
        k = stream.next_u128()
        idx = bisect_right(self._floors, k)
        # A cut lies strictly inside the dyadic cell iff its floor equals k
        # and it is not itself dyadic of this precision.
        if idx and self._floors[idx - 1] == k and not self._exact[idx - 1]:
            return self._refine(k, 128, stream)
        return idx

    def _refine(self, k, bits, stream):
        while True:
            k = (k << 64) | stream.next64()
            bits += 64
            below = 0
            inside = False
            for num, den in self._cuts:
                scaled = num << bits
                if scaled <= k * den:
                    below += 1
                elif scaled < (k + 1) * den:
                    inside = True
            if not inside:
                return below
