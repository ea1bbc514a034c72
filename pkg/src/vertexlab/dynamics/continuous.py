"""Continuous-time degenerations: exclusion and zero-range chains.

These run next-event (Gillespie) scheduling with double-precision
exponential clocks. Unlike the lattice kernels they are validated
statistically, not exactly; the discrete skeleton (which particle moves)
is still driven by the same deterministic stream.
"""

import math

from ..exactcore import as_exact
from .configs import ParticleConfig

__all__ = ["run_q_tasep", "run_asep", "run_q_boson", "step_positions"]


def step_positions(n):
    """The wedge start y_i = -i, i = 1..n, as a descending tuple."""
    return tuple(-i for i in range(1, n + 1))


def _check_q_open(q):
    qf = float(as_exact(q))
    if not 0.0 < qf < 1.0:
        raise ValueError("the asymmetry parameter must satisfy 0 < q < 1")
    return qf


def run_q_tasep(q, n_particles, horizon, stream, positions=None):
    """Evolve the right-jumping gap chain to continuous time `horizon`.

    Particle i hops one step right at rate 1 - q^gap_i, where gap_i is the
    free space ahead of it; the lead particle sees an infinite gap and hops
    at rate 1. Returns the positions as a descending tuple.
    """
    qf = _check_q_open(q)
    n = int(n_particles)
    if n < 1:
        raise ValueError("need at least one particle")
    pos = list(positions) if positions is not None else list(step_positions(n))
    if len(pos) != n or any(a <= b for a, b in zip(pos, pos[1:])):
        raise ValueError("positions must be strictly decreasing")
    rates = [1.0]
    for i in range(1, n):
        rates.append(1.0 - qf ** (pos[i - 1] - pos[i] - 1))
    total = math.fsum(rates)
    t = 0.0
    while True:
        t += stream.exponential(total)
        if t > horizon:
            return tuple(pos)
        target = stream.uniform01() * total
        acc = 0.0
        i = n - 1
        for j in range(n):
            acc += rates[j]
            if target < acc:
                i = j
                break
        pos[i] += 1
        if i + 1 < n:
            rates[i + 1] = 1.0 - qf ** (pos[i] - pos[i + 1] - 1)
        if i > 0:
            rates[i] = 1.0 - qf ** (pos[i - 1] - pos[i] - 1)
        total = math.fsum(rates)


def run_asep(q, n_particles, horizon, stream, positions=None):
    """Evolve the two-clock exclusion chain to continuous time `horizon`.

    Every particle carries a right clock of rate 1 and a left clock of rate
    q; a ring moves it one step unless the target site is occupied, in which
    case the attempt is discarded. Starts from the wedge unless positions are
    given. Returns the positions as a descending tuple.
    """
    qf = float(as_exact(q))
    if not 0.0 <= qf <= 1.0:
        raise ValueError("the left-jump rate must satisfy 0 <= q <= 1")
    n = int(n_particles)
    if n < 1:
        raise ValueError("need at least one particle")
    pos = list(positions) if positions is not None else list(step_positions(n))
    if len(pos) != n or any(a <= b for a, b in zip(pos, pos[1:])):
        raise ValueError("positions must be strictly decreasing")
    occupied = set(pos)
    total = n * (1.0 + qf)
    t = 0.0
    while True:
        t += stream.exponential(total)
        if t > horizon:
            return tuple(pos)
        u = stream.uniform01() * n
        i = min(int(u), n - 1)
        goes_right = stream.uniform01() * (1.0 + qf) < 1.0
        target = pos[i] + (1 if goes_right else -1)
        if target not in occupied:
            occupied.discard(pos[i])
            occupied.add(target)
            pos[i] = target


def run_q_boson(q, horizon, stream, config=None):
    """Evolve the zero-range chain fed by an infinite reservoir at site 1.

    The reservoir fires at rate 1; a stack of m particles at a finite site
    fires at rate 1 - q^m; each firing moves one particle a step right.
    Returns a ParticleConfig with the reservoir flag still set.
    """
    qf = _check_q_open(q)
    if config is None:
        config = ParticleConfig({}, reservoir_site=1)
    if config.reservoir_site != 1:
        raise ValueError("the reservoir must sit at site 1")
    mult = config.to_dict()
    if any(site < 2 for site in mult):
        raise ValueError("excited sites must lie strictly right of the reservoir")
    rates = {site: 1.0 - qf**m for site, m in mult.items()}
    total = 1.0 + math.fsum(rates.values())
    t = 0.0
    while True:
        t += stream.exponential(total)
        if t > horizon:
            return ParticleConfig(mult, reservoir_site=1)
        target = stream.uniform01() * total
        if target < 1.0:
            site = 1
        else:
            acc = 1.0
            site = None
            for s in sorted(rates):
                acc += rates[s]
                if target < acc:
                    site = s
                    break
            if site is None:
                site = max(rates)
        if site > 1:
            left = mult[site] - 1
            if left:
                mult[site] = left
                rates[site] = 1.0 - qf**left
            else:
                del mult[site]
                del rates[site]
        dest = site + 1
        grown = mult.get(dest, 0) + 1
        mult[dest] = grown
        rates[dest] = 1.0 - qf**grown
        total = 1.0 + math.fsum(rates.values())
