"""Particle configurations, the height function, and exact observables."""

import math

from ..exactcore import (
    ONE,
    ZERO,
    Signature,
    as_exact,
    q_binomial,
    signatures_bounded,
)
from ..symfunc import Specialization, as_signature, measure_weight

__all__ = [
    "ParticleConfig",
    "height",
    "q_correlation_observable",
    "brute_force_expectation",
]


class ParticleConfig:
    """Occupation-number view of a particle system on the nonnegative sites.

    Stores the finite multiplicities; boundary-driven families additionally
    flag one site as an infinite reservoir whose occupancy never depletes.
    Instances are immutable; step kernels return fresh configurations.
    """

    __slots__ = ("_mult", "reservoir_site", "_key")

    def __init__(self, multiplicities=None, reservoir_site=None):
        mult = {}
        for site, count in dict(multiplicities or {}).items():
            site = int(site)
            count = int(count)
            if site < 0:
                raise ValueError("sites live on the nonnegative integers")
            if count < 0:
                raise ValueError("multiplicities must be nonnegative")
            if count:
                mult[site] = count
        if reservoir_site is not None:
            reservoir_site = int(reservoir_site)
            if reservoir_site in mult:
                raise ValueError("the reservoir site cannot also carry a finite count")
        self._mult = mult
        self.reservoir_site = reservoir_site
        self._key = (tuple(sorted(mult.items())), reservoir_site)

    @classmethod
    def from_signature(cls, sig):
        return cls(as_signature(sig).multiplicities())

    @classmethod
    def empty(cls):
        return cls({})

    def signature(self):
        if self.reservoir_site is not None:
            raise ValueError("a reservoir configuration has no finite signature")
        return Signature.from_multiplicities(self._mult)

    def count(self, site):
        if site == self.reservoir_site:
            return math.inf
        return self._mult.get(site, 0)

    def to_dict(self):
        """Copy of the finite part only."""
        return dict(self._mult)

    def sites(self):
        """Occupied finite sites, ascending."""
        return sorted(self._mult)

    def rightmost(self):
        """Largest finitely occupied site, or None."""
        return max(self._mult) if self._mult else None

    @property
    def total(self):
        if self.reservoir_site is not None:
            return math.inf
        return sum(self._mult.values())

    @property
    def is_empty(self):
        return not self._mult and self.reservoir_site is None

    def __eq__(self, other):
        return isinstance(other, ParticleConfig) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        body = ", ".join(f"{s}: {c}" for s, c in sorted(self._mult.items()))
        tail = f", reservoir_site={self.reservoir_site}" if self.reservoir_site is not None else ""
        return f"ParticleConfig({{{body}}}{tail})"


def height(state, x):
    """Number of particles at or to the right of x.

    Accepts a Signature, a ParticleConfig, or a plain iterable of integer
    positions (the exclusion-process views, which live on all of Z). Returns
    math.inf when an infinite reservoir sits at or beyond x.
    """
    x = int(x)
    if isinstance(state, Signature):
        return state.height(x)
    if isinstance(state, ParticleConfig):
        if state.reservoir_site is not None and state.reservoir_site >= x:
            return math.inf
        return sum(c for s, c in state.to_dict().items() if s >= x)
    return sum(1 for p in state if p >= x)


def q_correlation_observable(q, nu, theta):
    """Sum of q^(i_1 + ... + i_k) over increasing 1-based index tuples
    (i_1 < ... < i_k) with nu_{i_j} equal to the j-th part of theta.

    Indices with a common part value contribute a q-binomial block, so the
    sum collapses to a product over the distinct values of theta.
    """
    q = as_exact(q)
    if isinstance(nu, ParticleConfig):
        nu = nu.signature()
    nu = as_signature(nu)
    theta = as_signature(theta)
    if len(theta) == 0:
        return ONE
    out = ONE
    for value, want in theta.multiplicities().items():
        have = nu.multiplicity(value)
        if want > have:
            return ZERO
        above = nu.height(value + 1)  # indices 1..above hold strictly larger parts
        out *= q ** (want * above + want * (want + 1) // 2) * q_binomial(have, want, q)
    return out


def brute_force_expectation(params, us, vspec, observable, cutoff):
    """Exact truncated expectation under the normalized two-alphabet measure.

    Sums measure_weight times the observable over every signature in the
    truncated support (parts at most `cutoff`; at least 1 in the degenerate
    second-alphabet case, where the measure puts no mass on zero parts).
    Returns (partial sum, 1 - partial mass); the second entry bounds the
    truncation error whenever the measure is a genuine probability measure
    and the observable is bounded by 1 in modulus on the support.
    """
    us = tuple(us)
    n = len(us)
    if n == 0:
        return as_exact(observable(Signature(()))), ZERO
    if not isinstance(vspec, Specialization):
        vspec = Specialization.values(vspec)
    lowest = 1 if vspec.kind == "rho" else 0
    if cutoff < lowest:
        raise ValueError("cutoff excludes the entire support")
    value = ZERO
    mass = ZERO
    for nu in signatures_bounded(n, int(cutoff), lowest):
        w = measure_weight(params, us, vspec, nu)
        if w == 0:
            continue
        mass += w
        value += w * as_exact(observable(nu))
    return value, ONE - mass
