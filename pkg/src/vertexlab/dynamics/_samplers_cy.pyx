# cython: language_level=3
"""Compiled twin of _samplers_py: Philox4x64-10 plus exact cut-table sampling.

The word-consumption protocol is identical to the pure-Python module, so a
trajectory sampled through either backend from the same (master_seed,
replica) is bit-identical. The fast paths here run on C integers; only the
astronomically rare cut-boundary refinements fall back to Python bignums.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc
from libc.math cimport log
from libc.stdint cimport uint64_t

from fractions import Fraction

__all__ = ["PhiloxStream", "CutTable", "philox4x64_block", "BACKEND_NAME"]

BACKEND_NAME = "cython"

cdef extern from *:
    ctypedef unsigned long long uint128_t "__uint128_t"

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL


cdef inline void _block(uint64_t k0, uint64_t k1,
                        uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                        uint64_t* out) noexcept nogil:
    cdef uint64_t x0 = c0, x1 = c1, x2 = c2, x3 = c3
    cdef uint128_t p0, p1
    cdef int rnd
    for rnd in range(10):
        if rnd:
            k0 = k0 + W0
            k1 = k1 + W1
        p0 = (<uint128_t> M0) * x0
        p1 = (<uint128_t> M1) * x2
        x0 = (<uint64_t> (p1 >> 64)) ^ x1 ^ k0
        x1 = <uint64_t> p1
        x2 = (<uint64_t> (p0 >> 64)) ^ x3 ^ k1
        x3 = <uint64_t> p0
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


def philox4x64_block(k0, k1, c0, c1, c2, c3):
    """One 10-round Philox4x64 block: four output words from counter and key."""
    cdef uint64_t out[4]
    _block(<uint64_t> k0, <uint64_t> k1,
           <uint64_t> c0, <uint64_t> c1, <uint64_t> c2, <uint64_t> c3, out)
    return (out[0], out[1], out[2], out[3])


cdef class PhiloxStream:
    """Deterministic word stream keyed by (master_seed, replica_index)."""

    cdef uint64_t k0, k1
    cdef uint64_t c0, c1, c2, c3
    cdef uint64_t buf[4]
    cdef int pos

    def __init__(self, master_seed, replica_index):
        master_seed = int(master_seed)
        replica_index = int(replica_index)
        if not 0 <= master_seed <= 0xFFFFFFFFFFFFFFFF:
            raise ValueError("master_seed must fit in 64 bits")
        if not 0 <= replica_index <= 0xFFFFFFFFFFFFFFFF:
            raise ValueError("replica_index must fit in 64 bits")
        self.k0 = <uint64_t> master_seed
        self.k1 = <uint64_t> replica_index
        self.c0 = 0
        self.c1 = 0
        self.c2 = 0
        self.c3 = 0
        self.pos = 4

    cdef uint64_t _next64c(self):
        if self.pos == 4:
            _block(self.k0, self.k1, self.c0, self.c1, self.c2, self.c3, self.buf)
            self.c0 += 1
            if self.c0 == 0:
                self.c1 += 1
                if self.c1 == 0:
                    self.c2 += 1
                    if self.c2 == 0:
                        self.c3 += 1
            self.pos = 0
        cdef uint64_t w = self.buf[self.pos]
        self.pos += 1
        return w

    def next64(self):
        """Next 64-bit word."""
        return self._next64c()

    def next_u128(self):
        """Next 128-bit integer; the earlier word supplies the high bits."""
        cdef uint64_t hi = self._next64c()
        cdef uint64_t lo = self._next64c()
        return ((<object> hi) << 64) | (<object> lo)

    def uniform01(self):
        """Double in the open interval (0, 1); used only by the
        continuous-time models, which are statistical anyway."""
        return ((self._next64c() >> 11) + 0.5) * (1.0 / 9007199254740992.0)

    def exponential(self, rate):
        cdef double r = rate
        if r <= 0:
            raise ValueError("exponential clocks need a positive rate")
        return -log(((self._next64c() >> 11) + 0.5) * (1.0 / 9007199254740992.0)) / r

    @property
    def blocks_generated(self):
        return (((<object> self.c3) << 192) | ((<object> self.c2) << 128)
                | ((<object> self.c1) << 64) | (<object> self.c0))


cdef class CutTable:
    """Exact sampler for a finite distribution given by rational weights.

    Same contract as the pure-Python CutTable; see that module's docstring.
    """

    cdef Py_ssize_t n_cuts
    cdef Py_ssize_t size
    cdef uint64_t* fhi
    cdef uint64_t* flo
    cdef unsigned char* is_exact
    cdef int trivial
    cdef object cuts  # list of (num, den) for the refinement fallback

    def __cinit__(self):
        self.fhi = NULL
        self.flo = NULL
        self.is_exact = NULL

    def __init__(self, weights):
        cuts = []
        total = Fraction(0)
        self.trivial = -1
        for idx, (num, den) in enumerate(weights):
            w = Fraction(num, den)
            if w < 0:
                raise ValueError(f"negative weight at index {idx}")
            if w == 1:
                self.trivial = idx
            total += w
            cuts.append(total)
        if total != 1:
            raise ValueError("weights must sum to exactly 1")
        cuts.pop()
        while cuts and cuts[len(cuts) - 1] == 1:
            cuts.pop()  # zero-weight tail cells are unreachable
        self.size = len(weights)
        self.cuts = [(c.numerator, c.denominator) for c in cuts]
        self.n_cuts = len(self.cuts)
        if self.n_cuts:
            self.fhi = <uint64_t*> PyMem_Malloc(self.n_cuts * sizeof(uint64_t))
            self.flo = <uint64_t*> PyMem_Malloc(self.n_cuts * sizeof(uint64_t))
            self.is_exact = <unsigned char*> PyMem_Malloc(self.n_cuts)
            if self.fhi == NULL or self.flo == NULL or self.is_exact == NULL:
                raise MemoryError
        cdef Py_ssize_t i
        for i in range(self.n_cuts):
            num, den = self.cuts[i]
            scaled = num << 128
            floor = scaled // den
            self.fhi[i] = <uint64_t> (floor >> 64)
            self.flo[i] = <uint64_t> (floor & 0xFFFFFFFFFFFFFFFF)
            self.is_exact[i] = 1 if scaled % den == 0 else 0

    def __dealloc__(self):
        PyMem_Free(self.fhi)
        PyMem_Free(self.flo)
        PyMem_Free(self.is_exact)

    def __len__(self):
        return self.size

    def sample(self, stream):
        if self.trivial >= 0:
            return self.trivial
        cdef uint64_t khi, klo
        cdef PhiloxStream ps
        if type(stream) is PhiloxStream:
            ps = <PhiloxStream> stream
            khi = ps._next64c()
            klo = ps._next64c()
        else:
            # duck-typed streams (test doubles) use the Python word method
            khi = <uint64_t> stream.next64()
            klo = <uint64_t> stream.next64()
        cdef Py_ssize_t idx = 0
        while idx < self.n_cuts:
            if self.fhi[idx] < khi or (self.fhi[idx] == khi and self.flo[idx] <= klo):
                idx += 1
            else:
                break
        # A cut lies strictly inside the dyadic cell iff its floor equals the
        # drawn integer and it is not itself dyadic of this precision.
        if idx and self.fhi[idx - 1] == khi and self.flo[idx - 1] == klo \
                and not self.is_exact[idx - 1]:
            k = ((<object> khi) << 64) | (<object> klo)
            return self._refine(k, 128, stream)
        return idx

    def _refine(self, k, bits, stream):
        while True:
            k = (k << 64) | stream.next64()
            bits += 64
            below = 0
            inside = False
            for num, den in self.cuts:
                scaled = num << bits
                if scaled <= k * den:
                    below += 1
                elif scaled < (k + 1) * den:
                    inside = True
            if not inside:
                return below
