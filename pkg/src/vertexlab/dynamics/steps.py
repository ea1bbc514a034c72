"""Markov step kernels for the lattice particle systems.

The sequential (J = 1) families walk sites left to right carrying at most one
horizontal arrow; the fused families carry up to J; the chipping families
update every stack in parallel from the q-deformed beta-binomial law. Every
finite draw goes through an exact CutTable, so each kernel realizes its
transition law exactly. Randomness consumption is part of the contract:
deterministic rows consume nothing, every other row costs one 128-bit read,
and the run-length draw past the rightmost stack costs one more.
"""

from ..exactcore import ONE, ZERO, as_exact
from ..weights import (
    FusedSpin,
    ModelParams,
    RegimeError,
    VertexState,
    _as_q_power,
    phi_beta_binomial,
    weight_L,
    weight_L_fused_row,
    weight_L_row,
)
from ._backend import CutTable
from .configs import ParticleConfig

__all__ = [
    "LRowCache",
    "PhiCache",
    "sample_run_length",
    "step_x_circ",
    "step_x_plus",
    "step_fused",
    "step_q_hahn",
]


def _build_table(weights, context):
    for w in weights:
        if w < 0:
            raise RegimeError(
                f"negative stochastic weight in {context}: parameters are "
                "outside the nonnegativity region"
            )
    return CutTable([(w.numerator, w.denominator) for w in weights])


class LRowCache:
    """Cut tables for the stochastic rows L(m, h; ., .) at fixed parameters.

    With an integer FusedSpin the rows are the general-J kernels; without one
    they are the elementary J = 1 rows.
    """

    def __init__(self, params: ModelParams, u, spin: FusedSpin = None):
        self.params = params
        self.u = as_exact(u)
        self.spin = spin
        self._rows = {}

    def row(self, m, h):
        key = (m, h)
        hit = self._rows.get(key)
        if hit is None:
            if self.spin is None:
                pairs = weight_L_row(self.params, self.u, m, h)
            else:
                pairs = weight_L_fused_row(self.params, self.spin, self.u, m, h)
            outcomes = tuple(st for st, _ in pairs)
            table = _build_table([w for _, w in pairs], f"row L({m}, {h}; ., .)")
            hit = (outcomes, table)
            self._rows[key] = hit
        return hit

    def sample(self, m, h, stream):
        outcomes, table = self.row(m, h)
        return outcomes[table.sample(stream)]

    def travel_probability(self):
        """L(0, 1; 0, 1): the chance a lone arrow clears an empty site."""
        p = weight_L(self.params, self.u, VertexState(0, 1, 0, 1))
        if not ZERO <= p < ONE:
            raise RegimeError(
                "the empty-site pass probability must lie in [0, 1) for the "
                "sequential update to terminate"
            )
        return p


def sample_run_length(p, stream):
    """Number of consecutive Bernoulli(p) successes before the first failure.

    Uses a single lazily refined dyadic uniform U and returns the largest g
    with U < p^g, so the law is exactly geometric and the draw consumes one
    128-bit read plus refinements only on cut boundaries.
    """
    p = as_exact(p)
    if not ZERO <= p < ONE:
        raise ValueError("the success probability must lie in [0, 1)")
    if p == 0:
        return 0
    k = stream.next_u128()
    bits = 128
    num, den = p.numerator, p.denominator
    cn, cd = num, den  # running power p^(g+1)
    g = 0
    while True:
        scaled = cn << bits
        if (k + 1) * cd <= scaled:
            # surely U < p^(g+1): another success
            g += 1
            cn *= num
            cd *= den
        elif scaled <= k * cd:
            return g
        else:
            k = (k << 64) | stream.next64()
            bits += 64


def _walk(cache, mult, x, h, stream, travel=None):
    """Left-to-right sequential pass; returns the new multiplicity dict.

    `travel` is the J = 1 empty-site pass probability; when the carried arrow
    is past the rightmost stack its landing site is drawn in one geometric
    step instead of site by site.
    """
    new = {}
    rightmost = max(mult) if mult else None
    while True:
        if h == 0 and (rightmost is None or x > rightmost):
            break
        m = mult.get(x, 0)
        if (
            m == 0
            and h == 1
            and travel is not None
            and (rightmost is None or x > rightmost)
        ):
            g = sample_run_length(travel, stream)
            new[x + g] = new.get(x + g, 0) + 1
            break
        i2, j2 = cache.sample(m, h, stream)
        if i2:
            new[x] = new.get(x, 0) + i2
        h = j2
        x += 1
    return new


def _finite_no_reservoir(config):
    if config.reservoir_site is not None:
        raise ValueError("this kernel acts on finite configurations only")
    return config.to_dict()


def step_x_circ(params, v, config, stream, cache=None):
    """One sequential update of the particle-conserving chain.

    Site 0 is processed first with no incoming arrow; the carried arrow
    h in {0, 1} propagates right until it dies.
    """
    mult = _finite_no_reservoir(config)
    if cache is None:
        cache = LRowCache(params, v)
    new = _walk(cache, mult, 0, 0, stream, cache.travel_probability())
    return ParticleConfig(new)


def step_x_plus(params, u, config, stream, cache=None):
    """One sequential update of the injection chain: an arrow enters at
    site 1 and exactly one particle is added. Site 0 must be empty."""
    mult = _finite_no_reservoir(config)
    if mult.get(0):
        raise ValueError("injection dynamics forbids particles at site 0")
    if cache is None:
        cache = LRowCache(params, u)
    new = _walk(cache, mult, 1, 1, stream, cache.travel_probability())
    return ParticleConfig(new)


def step_fused(params, u, J, mode, config, stream, route="direct", cache=None):
    """One step of the general-J dynamics, either sampled directly from the
    fused rows or as the composition of J elementary steps at u, qu, ...,
    q^(J-1) u. The two routes realize the same transition law.

    mode "circ" conserves the particle count; mode "plus" injects J arrows
    at site 1 and adds exactly J particles.
    """
    J = int(J)
    if J < 1:
        raise ValueError("J must be a positive integer")
    if mode not in ("circ", "plus"):
        raise ValueError("mode must be 'circ' or 'plus'")
    if route == "substeps":
        substep = step_x_circ if mode == "circ" else step_x_plus
        caches = cache if cache is not None else [None] * J
        for r in range(J):
            config = substep(params, u * params.q**r, config, stream, caches[r])
        return config
    if route != "direct":
        raise ValueError("route must be 'direct' or 'substeps'")
    mult = _finite_no_reservoir(config)
    if cache is None:
        cache = LRowCache(params, u, FusedSpin.from_J(params.q, J))
    if mode == "circ":
        new = _walk(cache, mult, 0, 0, stream)
    else:
        if mult.get(0):
            raise ValueError("injection dynamics forbids particles at site 0")
        new = _walk(cache, mult, 1, J, stream)
    return ParticleConfig(new)


class PhiCache:
    """Cut tables for the beta-binomial departure law phi(. | m)."""

    def __init__(self, q, mu, nu):
        self.q = as_exact(q)
        self.mu = as_exact(mu)
        self.nu = as_exact(nu)
        self._tables = {}

    def table(self, m):
        hit = self._tables.get(m)
        if hit is None:
            if m == "inf":
                J = _as_q_power(self.mu, self.nu, self.q)
                if J is None:
                    raise ValueError(
                        "the reservoir law needs mu = q^J nu with integer J >= 0"
                    )
                weights = [
                    phi_beta_binomial(self.q, self.mu, self.nu, j, "inf")
                    for j in range(J + 1)
                ]
            else:
                weights = [
                    phi_beta_binomial(self.q, self.mu, self.nu, j, m)
                    for j in range(m + 1)
                ]
            hit = _build_table(weights, f"phi(. | {m})")
            self._tables[m] = hit
        return hit

    def sample(self, m, stream):
        return self.table(m).sample(stream)


def step_q_hahn(q, s_sq, qJ, variant, config, stream, cache=None):
    """One parallel chipping update: every stack emits j ~ phi(. | m) to the
    next site, all moves simultaneous.

    variant "circ": plain update on sites 0, 1, 2, ...
    variant "plus": site 0 empty; J fresh particles land on site 1.
    variant "inf": site 1 is an infinite reservoir emitting j ~ phi(. | inf).

    Departures are drawn reservoir first, then occupied sites in increasing
    order; that ordering is part of the record format.
    """
    if variant not in ("circ", "plus", "inf"):
        raise ValueError("variant must be 'circ', 'plus', or 'inf'")
    q = as_exact(q)
    s_sq = as_exact(s_sq)
    qJ = as_exact(qJ)
    if cache is None:
        cache = PhiCache(q, qJ * s_sq, s_sq)

    if variant == "inf":
        if config.reservoir_site != 1:
            raise ValueError("variant 'inf' needs the reservoir at site 1")
        mult = config.to_dict()
        if any(site < 2 for site in mult):
            raise ValueError("excited sites must lie strictly right of the reservoir")
    else:
        mult = _finite_no_reservoir(config)
        if variant == "plus" and mult.get(0):
            raise ValueError("injection dynamics forbids particles at site 0")

    new = dict(mult)

    def move(site, j):
        if j:
            left = new.get(site, 0) - j
            if left:
                new[site] = left
            else:
                new.pop(site, None)
            new[site + 1] = new.get(site + 1, 0) + j

    if variant == "inf":
        emitted = cache.sample("inf", stream)
        if emitted:
            new[2] = new.get(2, 0) + emitted
    for site in sorted(mult):
        move(site, cache.sample(mult[site], stream))
    if variant == "plus":
        J = _as_q_power(qJ, ONE, q)
        if J is None or J < 1:
            raise ValueError("variant 'plus' needs qJ = q^J with integer J >= 1")
        new[1] = new.get(1, 0) + J
    return ParticleConfig(new, reservoir_site=config.reservoir_site)
