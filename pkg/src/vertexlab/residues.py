"""Exact evaluation of the nested-contour observables by residue summation.

Every integral in scope is a finite sum of residues, so no quadrature is
involved anywhere. The main contour around the inverted spectral parameters
contributes the injective-assignment residue sum res_sigma; the small circles
around the origin are never integrated directly but enter through a subset
recombination with explicit q-power bookkeeping. The continuous-time
degenerations replace the main contour by q-nested circles around a single
point, where iterated residues pick up cluster points q^m; exponential
factors are handled exactly (truncated at the pole order, which is exact for
residue extraction) or, for the model with essential singularities at two
points, by adaptive truncated series in high-precision floats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import mpmath
from gmpy2 import mpq

from .exactcore import (
    ONE,
    ZERO,
    LinearFactorExpression,
    Rationalish,
    as_exact,
)
from .weights import ModelParams

__all__ = [
    "MomentQuery",
    "CorrelationQuery",
    "PrecisionError",
    "res_sigma",
    "centered_moment",
    "q_moment",
    "q_correlation_exact",
    "q_moment_six_vertex",
    "six_vertex_params",
    "q_moment_asep",
    "q_moment_q_hahn",
    "q_moment_q_boson",
    "recombination_polynomial_sides",
]


class PrecisionError(ArithmeticError):
    """A float-mode series failed to stabilize at the working precision."""


# ---------------------------------------------------------------------------
# Queries.
# ---------------------------------------------------------------------------


def _check_spectral(params: ModelParams, u: Tuple[mpq, ...]) -> None:
    q = params.q
    if q == 1:
        raise ValueError("need q != 1")
    if not u:
        raise ValueError("need at least one spectral parameter")
    for a in u:
        if a == 0:
            raise ValueError("spectral parameters must be nonzero")
    if len(set(u)) != len(u):
        raise ValueError("spectral parameters must be pairwise distinct")
    for a in u:
        for b in u:
            if a == q * b:
                raise ValueError("need u_i != q u_j for every pair i, j")
    if params.su_mode:
        if ONE in u:
            raise ValueError("product-mode spectral parameters must avoid 1")
    else:
        s = params.require_s()
        if ONE / s in u:
            raise ValueError("spectral parameters must avoid 1/s")


def _check_positions(x: Tuple[int, ...]) -> None:
    if not x:
        raise ValueError("need at least one position")
    if any(a < b for a, b in zip(x, x[1:])):
        raise ValueError("positions must be nonincreasing")
    if x[-1] < 1:
        raise ValueError("positions must be >= 1")


@dataclass(frozen=True)
class MomentQuery:
    """Multi-point q-moment request: positions x under spectral data u.

    In product mode the entries of u are the products su, and everything
    downstream stays rational in (q, s^2, su).
    """

    params: ModelParams
    u: Tuple[mpq, ...]
    x: Tuple[int, ...]

    def __post_init__(self):
        _check_spectral(self.params, self.u)
        _check_positions(self.x)

    @classmethod
    def make(cls, params: ModelParams, u, x) -> "MomentQuery":
        return cls(params, tuple(as_exact(a) for a in u), tuple(int(a) for a in x))

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def ell(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class CorrelationQuery:
    """q-correlation request: a signature theta of length k <= n."""

    params: ModelParams
    u: Tuple[mpq, ...]
    theta: Tuple[int, ...]

    def __post_init__(self):
        self.params.require_s()
        _check_spectral(self.params, self.u)
        if len(self.theta) > len(self.u):
            raise ValueError("need k <= n")
        if any(a < b for a, b in zip(self.theta, self.theta[1:])):
            raise ValueError("theta must be nonincreasing")
        if self.theta and self.theta[-1] < 0:
            raise ValueError("theta parts must be >= 0")

    @classmethod
    def make(cls, params: ModelParams, u, theta) -> "CorrelationQuery":
        return cls(
            params, tuple(as_exact(a) for a in u), tuple(int(a) for a in theta)
        )

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def k(self) -> int:
        return len(self.theta)


def _transport_ratio(params: ModelParams, u: mpq) -> mpq:
    """The per-column factor (u - s)/(u - 1/s), rational in (su, s^2)."""
    if params.su_mode:
        return (u - params.s_sq) / (u - ONE)
    s = params.s
    return (u - s) / (u - ONE / s)


# ---------------------------------------------------------------------------
# Moments for the general-u dynamics.
# ---------------------------------------------------------------------------


def res_sigma(query: MomentQuery, sigma: Sequence[int]) -> mpq:
    """Residue term of the centered moment for one injective assignment.

    sigma lists the 1-based spectral indices (sigma(1), ..., sigma(ell));
    position i takes its residue at the inverse of u_{sigma(i)}.
    """
    sigma = tuple(int(a) for a in sigma)
    ell = query.ell
    n = query.n
    if len(sigma) != ell:
        raise ValueError("sigma must assign every position")
    if len(set(sigma)) != ell or any(not 1 <= a <= n for a in sigma):
        raise ValueError("sigma must be injective into 1..n")
    q = query.params.q
    u = query.u
    out = (ONE - q) ** ell * q ** (ell * (ell - 1) // 2)
    for i, a in enumerate(sigma):
        out *= _transport_ratio(query.params, u[a - 1]) ** (query.x[i] - 1)
    chosen = set(sigma)
    for a in chosen:
        for b in range(1, n + 1):
            if b not in chosen:
                out *= (u[a - 1] - q * u[b - 1]) / (u[a - 1] - u[b - 1])
    for p in range(ell):
        for r in range(p + 1, ell):
            ua, ub = u[sigma[p] - 1], u[sigma[r] - 1]
            out *= (ua - q * ub) / (ua - ub)
    return out


def centered_moment(query: MomentQuery) -> mpq:
    """E prod_i (q^(i-1) - q^(h(x_i))), as a finite residue sum.

    Empty assignment set for ell > n, matching the vanishing of the product
    when more factors are requested than there are particles.
    """
    if query.ell > query.n:
        return ZERO
    total = ZERO
    for sigma in itertools.permutations(range(1, query.n + 1), query.ell):
        total += res_sigma(query, sigma)
    return total


def _zero_circle_recombination(ell: int, q, block):
    """Assemble E prod_i q^(h(x_i)) from main-contour blocks over subsets.

    block(I) is the plain iterated-residue value of the main-contour integral
    for the subsequence of positions indexed by I (1-based, increasing);
    every variable shrunk to the origin leaves the stated q-power behind.
    Works for exact and float scalar types alike.
    """
    total = None
    for k in range(ell + 1):
        for subset in itertools.combinations(range(1, ell + 1), k):
            term = q ** (k * ell - sum(subset)) * block(subset)
            total = term if total is None else total + term
    return total


def q_moment(query: MomentQuery) -> mpq:
    """E prod_i q^(h(x_i)), exactly.

    The mixed contours split into the main part plus small circles at the
    origin; shrinking the circles one by one produces pure q-powers, and the
    surviving main-contour integrals are centered moments of x-subsequences
    up to an explicit prefactor.
    """
    q = query.params.q
    ell = query.ell
    cache: Dict[Tuple[int, ...], mpq] = {(): ONE}

    def block(subset):
        xs = tuple(query.x[i - 1] for i in subset)
        if xs not in cache:
            k = len(xs)
            inner = centered_moment(MomentQuery(query.params, query.u, xs))
            cache[xs] = (-1) ** k * q ** (-k * (k - 1) // 2) * inner
        return cache[xs]

    return _zero_circle_recombination(ell, q, block)


# ---------------------------------------------------------------------------
# q-correlation functions.
# ---------------------------------------------------------------------------


def q_correlation_exact(query: CorrelationQuery) -> mpq:
    """Expectation of the q-correlation observable indexed by theta + 1^k.

    The conjugated symmetric function of the inverted variables is expanded
    into a sum over permutations of products of affine factors; the k-fold
    integral is then a sum of iterated simple residues at inverted spectral
    parameters over injective assignments.
    """
    from .symfunc import c_factor

    k = query.k
    if k == 0:
        return ONE
    params = query.params
    q = params.q
    s = params.require_s()
    us = query.u
    theta = query.theta
    names = [f"w{i}" for i in range(1, k + 1)]

    sym = LinearFactorExpression([])
    for perm in itertools.permutations(range(k)):
        term = LinearFactorExpression.constant(1)
        for a in range(k):
            for b in range(a + 1, k):
                wa, wb = names[perm[a]], names[perm[b]]
                term = term * LinearFactorExpression.linear({wb: 1, wa: -q}, 0)
                term = term * LinearFactorExpression.linear({wb: 1, wa: -1}, 0, -1)
        for i in range(k):
            w = names[perm[i]]
            term = term * LinearFactorExpression.factor(-s, w, 1, theta[i])
            term = term * LinearFactorExpression.factor(1, w, -s, -theta[i])
        sym = sym + term

    expr = sym
    for w in names:
        expr = expr * LinearFactorExpression.factor(1, w, -s, -1)
        for u in us:
            expr = expr * LinearFactorExpression.factor(-q * u, w, 1)
            expr = expr * LinearFactorExpression.factor(-u, w, 1, -1)
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            wa, wb = names[a], names[b]
            expr = expr * LinearFactorExpression.linear({wa: 1, wb: -1}, 0)
            expr = expr * LinearFactorExpression.linear({wa: 1, wb: -q}, 0, -1)

    total = ZERO
    for assign in itertools.permutations(range(query.n), k):
        piece = expr
        for w, j in zip(reversed(names), reversed(assign)):
            piece = piece.residue_at_simple_pole(w, ONE / us[j])
            if piece.is_zero():
                break
        else:
            total += piece.constant_value()

    pref = (
        (-1) ** k
        * q ** (k * (k + 1) // 2)
        / math.factorial(k)
        * (-s) ** sum(theta)
        * c_factor(params, theta)
    )
    return pref * total


# ---------------------------------------------------------------------------
# Six vertex specialization.
# ---------------------------------------------------------------------------


def six_vertex_params(q: Rationalish) -> ModelParams:
    """Product-mode parameters with the spin role pinned to s^2 = 1/q."""
    q = as_exact(q)
    if q == 0 or q == 1:
        raise ValueError("need q outside {0, 1}")
    return ModelParams.from_q_ssq(q, ONE / q)


def q_moment_six_vertex(query: MomentQuery) -> mpq:
    """Height moments of the stochastic six vertex model on the quadrant.

    Same residue machinery; the product mode keeps everything rational in
    (q, t) even though the spin role s = q^(-1/2) is irrational.
    """
    params = query.params
    if not params.su_mode or params.s_sq * params.q != 1:
        raise ValueError("six vertex moments need product mode with s^2 = 1/q")
    return q_moment(query)


# ---------------------------------------------------------------------------
# Shared cluster-residue driver for the q-nested single-point contours.
# ---------------------------------------------------------------------------


def _cluster_residue_sum(
    ell: int,
    q: mpq,
    factor_builder,
    exp_rate: Optional[mpq] = None,
) -> Dict[mpq, mpq]:
    """Iterated residues over q-nested circles around 1, innermost first.

    factor_builder(name, i) supplies the rational factors of variable i
    (1-based). Residue points of earlier (inner) variables seed q-shifted
    cluster points for later ones, so variable number i from the inside sees
    candidate centers q^m for 0 <= m < i; centers where no pole lives
    contribute nothing and are skipped by the pole-order probe.

    With exp_rate set, every variable implicitly carries exp(-exp_rate * v).
    At each extraction the exponential splits into a scalar at the center
    times a Taylor polynomial truncated at the pole order, which is exact for
    the residue. Returns {accumulated rate r: scalar}, the value being
    sum_r scalar * exp(-r); without exp_rate the lone key is 0.
    """
    names = [f"v{i}" for i in range(1, ell + 1)]
    expr = LinearFactorExpression.constant(1)
    for a in range(ell):
        for b in range(a + 1, ell):
            expr = expr * LinearFactorExpression.linear(
                {names[a]: 1, names[b]: -1}, 0
            )
            expr = expr * LinearFactorExpression.linear(
                {names[a]: 1, names[b]: -q}, 0, -1
            )
    for i in range(ell):
        expr = expr * factor_builder(names[i], i + 1)

    buckets: Dict[mpq, LinearFactorExpression] = {ZERO: expr}
    for step, i in enumerate(range(ell - 1, -1, -1)):
        name = names[i]
        centers = [q**m for m in range(step + 1)]
        new: Dict[mpq, LinearFactorExpression] = {}
        for rate, cur in buckets.items():
            for center in centers:
                order = cur.pole_order(name, center)
                if order == 0:
                    continue
                piece = cur
                key = rate
                if exp_rate is not None:
                    poly = LinearFactorExpression([])
                    coeff = ONE
                    for m in range(order):
                        poly = poly + LinearFactorExpression.factor(
                            1, name, -center, m
                        ).scale(coeff)
                        coeff = coeff * (-exp_rate) / (m + 1)
                    piece = cur * poly
                    key = rate + exp_rate * center
                res = piece.residue_at_pole(name, center)
                if res.is_zero():
                    continue
                if key in new:
                    new[key] = new[key] + res
                else:
                    new[key] = res
        buckets = new
        if not buckets:
            return {}
    return {rate: val.constant_value() for rate, val in buckets.items()}


def _degenerate_positions(x, ell: Optional[int], least: int) -> Tuple[int, ...]:
    if isinstance(x, (int,)) or (hasattr(x, "__int__") and not hasattr(x, "__iter__")):
        xs = (int(x),) * (1 if ell is None else int(ell))
    else:
        xs = tuple(int(a) for a in x)
        if ell is not None and int(ell) != len(xs):
            raise ValueError("ell disagrees with the number of positions")
    if not xs:
        raise ValueError("need at least one position")
    if any(a < b for a, b in zip(xs, xs[1:])):
        raise ValueError("positions must be nonincreasing")
    if least is not None and xs[-1] < least:
        raise ValueError(f"positions must be >= {least}")
    return xs


def _exact_time(t) -> mpq:
    if isinstance(t, float):
        num, den = t.as_integer_ratio()
        return mpq(num, den)
    return as_exact(t)


def _require_q_interval(q: mpq) -> None:
    if not (0 < q < 1):
        raise ValueError("need 0 < q < 1")


# ---------------------------------------------------------------------------
# q-Hahn system: exact.
# ---------------------------------------------------------------------------


def q_moment_q_hahn(
    q: Rationalish,
    s_sq: Rationalish,
    qJ: Rationalish,
    n: int,
    x,
    ell: Optional[int] = None,
) -> mpq:
    """E prod_i q^(h(x_i)) for the q-Hahn system after n steps, exactly.

    The reservoir holds infinitely many particles at 1, so any position 1
    gives a vanishing moment. Contours are q-nested around the distinguished
    point with 0 and the inverse squared spin left outside, rescaled so that
    only s^2 enters.
    """
    q = as_exact(q)
    sigma = as_exact(s_sq)
    qJ = as_exact(qJ)
    n = int(n)
    _require_q_interval(q)
    if sigma > 0:
        raise ValueError("need s^2 <= 0")
    if n < 0:
        raise ValueError("need n >= 0 steps")
    xs = _degenerate_positions(x, ell, 1)
    if xs[-1] == 1:
        return ZERO
    ell = len(xs)

    def build(name: str, i: int) -> LinearFactorExpression:
        xi = xs[i - 1]
        out = LinearFactorExpression.factor(1, name, 0, -1)
        out = out * LinearFactorExpression.factor(-sigma, name, 1, xi - 2 - n)
        out = out * LinearFactorExpression.factor(-1, name, 1, -(xi - 1))
        out = out * LinearFactorExpression.factor(-qJ * sigma, name, 1, n)
        return out

    buckets = _cluster_residue_sum(ell, q, build)
    total = ZERO
    for val in buckets.values():
        total += val
    return (-1) ** ell * q ** (ell * (ell - 1) // 2) * total


# ---------------------------------------------------------------------------
# q-Boson system: exact rational-in-exp(-rate) form, reported as a float.
# ---------------------------------------------------------------------------


def q_moment_q_boson(
    q: Rationalish,
    t,
    x,
    ell: Optional[int] = None,
    precision: int = 128,
) -> mpmath.mpf:
    """E prod_i q^(h(x_i)) for the continuous-time q-Boson system at time t.

    The residue schedule is exact; the only floating step is the final
    evaluation of the exponentials, carried out with `precision` mantissa
    bits (plus guard bits internally).
    """
    q = as_exact(q)
    _require_q_interval(q)
    t_exact = _exact_time(t)
    if t_exact < 0:
        raise ValueError("need t >= 0")
    xs = _degenerate_positions(x, ell, 1)
    ell = len(xs)
    tau = (ONE - q) * t_exact

    def build(name: str, i: int) -> LinearFactorExpression:
        out = LinearFactorExpression.factor(1, name, 0, -1)
        out = out * LinearFactorExpression.factor(-1, name, 1, -(xs[i - 1] - 1))
        return out

    if xs[-1] == 1:
        buckets = {}
    else:
        buckets = _cluster_residue_sum(ell, q, build, exp_rate=tau)
    pref = (-1) ** ell * q ** (ell * (ell - 1) // 2)
    with mpmath.workprec(precision + 32):
        total = mpmath.mpf(0)
        for rate, val in buckets.items():
            scaled = pref * val
            total += _mpf_of_exact(scaled) * mpmath.exp(-_mpf_of_exact(rate))
    with mpmath.workprec(precision):
        return +total


def _mpf_of_exact(value: mpq) -> mpmath.mpf:
    return mpmath.mpf(int(value.numerator)) / mpmath.mpf(int(value.denominator))


# ---------------------------------------------------------------------------
# ASEP: adaptive truncated-series engine in high-precision floats.
# ---------------------------------------------------------------------------
#
# After centering the main-contour variables at the distinguished point, each
# variable contributes an exactly-known monomial offset z^y times a function
# analytic at 0, times exp(c0/z) whose pairing with the series extracts the
# residue. Series are truncated at a common absolute degree M; offsets are
# embedded when the series is built, so capping at M is consistent across all
# later products. M grows until two consecutive values agree to tolerance.


def _u_affpow(a0, a1, e: int, length: int):
    """Taylor coefficients of (a0 + a1 z)^e around 0, a0 != 0, any integer e."""
    out = []
    coeff = a0**e
    ratio = a1 / a0
    for m in range(length):
        out.append(coeff)
        coeff = coeff * ratio * (e - m) / (m + 1)
    return out


def _u_mul(a, b, length: int):
    out = [mpmath.mpf(0)] * length
    for i, ai in enumerate(a):
        if i >= length:
            break
        for j, bj in enumerate(b):
            if i + j >= length:
                break
            out[i + j] += ai * bj
    return out


def _u_exp(a, length: int):
    """exp of a Taylor series; the constant term exponentiates separately."""
    head = mpmath.exp(a[0]) if a else mpmath.mpf(1)
    out = [mpmath.mpf(0)] * length
    out[0] = mpmath.mpf(1)
    for m in range(1, length):
        acc = mpmath.mpf(0)
        for j in range(1, m + 1):
            if j < len(a):
                acc += j * a[j] * out[m - j]
        out[m] = acc / m
    return [head * c for c in out]


def _asep_unit(y: int, q, rootq, c2, cap: int):
    """One variable's series around the distinguished point, offset embedded.

    Returns [(absolute exponent, coefficient)] for exponents y..cap, empty
    when y exceeds the cap (callers start the cap above max(y)).
    """
    length = cap - y + 1
    if length <= 0:
        return []
    inv_w = _u_affpow(rootq, mpmath.mpf(1), -1, length)
    ratio_rest = _u_affpow(1 - q, -rootq, -y, length)
    scale = (-1 / rootq) ** y
    d = (1 - q) / rootq
    exp_arg = _u_affpow(-d, mpmath.mpf(1), -1, length)
    exp_part = _u_exp([c2 * c for c in exp_arg], length)
    series = _u_mul(_u_mul(inv_w, ratio_rest, length), exp_part, length)
    return [(y + m, scale * c) for m, c in enumerate(series)]


def _asep_block(ys: Tuple[int, ...], q, rootq, c0, c2, cap: int):
    """Iterated residues at the distinguished point for one subset block."""
    k = len(ys)
    units = [_asep_unit(y, q, rootq, c2, cap) for y in ys]
    if any(not u for u in units):
        return mpmath.mpf(0)
    grid: Dict[Tuple[int, ...], mpmath.mpf] = {}
    for combo in itertools.product(*units):
        key = tuple(e for e, _ in combo)
        val = combo[0][1]
        for _, c in combo[1:]:
            val = val * c
        grid[key] = val
    mins = [u[0][0] for u in units]
    d0 = (1 - q) * rootq
    for a in range(k):
        for b in range(a + 1, k):
            grid = _m_shift_diff(grid, a, b, cap)
            grid = _m_div_cross(grid, a, b, d0, q, mins, cap)
    for axis in range(k - 1, -1, -1):
        grid = _m_pair_exp(grid, axis, c0)
    return grid.get((), mpmath.mpf(0))


def _m_shift_diff(grid, a: int, b: int, cap: int):
    """Multiply by (z_a - z_b), dropping exponents beyond the cap."""
    out: Dict[Tuple[int, ...], mpmath.mpf] = {}
    for key, val in grid.items():
        if key[a] + 1 <= cap:
            ka = key[:a] + (key[a] + 1,) + key[a + 1 :]
            out[ka] = out.get(ka, mpmath.mpf(0)) + val
        if key[b] + 1 <= cap:
            kb = key[:b] + (key[b] + 1,) + key[b + 1 :]
            out[kb] = out.get(kb, mpmath.mpf(0)) - val
    return out


def _m_div_cross(grid, a: int, b: int, d0, q, mins, cap: int):
    """Divide by d0 + z_a - q z_b via the graded recurrence."""
    k = len(mins)
    ranges = [range(mins[i], cap + 1) for i in range(k)]
    keys = sorted(itertools.product(*ranges), key=lambda key: (sum(key), key))
    out: Dict[Tuple[int, ...], mpmath.mpf] = {}
    zero = mpmath.mpf(0)
    for key in keys:
        acc = grid.get(key, zero)
        ka = key[:a] + (key[a] - 1,) + key[a + 1 :]
        prev = out.get(ka)
        if prev is not None:
            acc = acc - prev
        kb = key[:b] + (key[b] - 1,) + key[b + 1 :]
        prev = out.get(kb)
        if prev is not None:
            acc = acc + q * prev
        if acc:
            out[key] = acc / d0
    return out


def _m_pair_exp(grid, axis: int, c0):
    """Residue in one variable: pair the series against exp(c0/z)."""
    out: Dict[Tuple[int, ...], mpmath.mpf] = {}
    for key, val in grid.items():
        j = key[axis] + 1
        if j < 0:
            continue
        rest = key[:axis] + key[axis + 1 :]
        term = val * c0**j / math.factorial(j)
        out[rest] = out.get(rest, mpmath.mpf(0)) + term
    return out


def q_moment_asep(
    q: Rationalish,
    t,
    x,
    ell: Optional[int] = None,
    precision: int = 128,
) -> mpmath.mpf:
    """E prod_i q^(h(x_i)) for the ASEP at time t from step initial data.

    h(x) counts particles at or to the right of x; positions may be any
    integers. Residues at the distinguished point are computed from adaptive
    truncated series; the subset recombination then supplies the zero-circle
    bookkeeping. Raises PrecisionError if the series refuses to stabilize.
    """
    q = as_exact(q)
    _require_q_interval(q)
    t_exact = _exact_time(t)
    if t_exact < 0:
        raise ValueError("need t >= 0")
    xs = _degenerate_positions(x, ell, None)
    ell = len(xs)
    with mpmath.workprec(precision + 64):
        qf = _mpf_of_exact(q)
        rootq = mpmath.sqrt(qf)
        tf = _mpf_of_exact(t_exact)
        c0 = -(1 - qf) * rootq * tf
        c2 = (1 - qf) * tf / rootq
        tol = mpmath.mpf(2) ** (-(precision + 8))
        cap = 24 + 2 * ell + max(abs(y) for y in xs)
        prev = None
        value = None
        while True:
            cache: Dict[Tuple[int, ...], mpmath.mpf] = {(): mpmath.mpf(1)}

            def block(subset):
                ys = tuple(xs[i - 1] for i in subset)
                if ys not in cache:
                    cache[ys] = _asep_block(ys, qf, rootq, c0, c2, cap)
                return cache[ys]

            value = _zero_circle_recombination(ell, qf, block)
            if prev is not None and abs(value - prev) <= tol * (1 + abs(value)):
                break
            if cap > 400:
                raise PrecisionError(
                    "residue series did not stabilize; raise precision or cap"
                )
            prev = value
            cap += 24
    with mpmath.workprec(precision):
        return +value


# ---------------------------------------------------------------------------
# The recombination identity behind the subset assembly.
# ---------------------------------------------------------------------------


def _poly_add(poly, key, coeff) -> None:
    val = poly.get(key, 0) + coeff
    if val:
        poly[key] = val
    else:
        poly.pop(key, None)


def _poly_string(poly, ell: int) -> str:
    names = ["Y"] + [f"X{i}" for i in range(1, ell + 1)]
    parts = []
    for key in sorted(poly):
        factors = [str(poly[key])]
        for slot, e in enumerate(key):
            if e:
                factors.append(names[slot] if e == 1 else f"{names[slot]}^{e}")
        parts.append("*".join(factors))
    return " + ".join(parts) if parts else "0"


def recombination_polynomial_sides(ell: int) -> Tuple[str, str]:
    """Both sides of the subset identity used by the moment assembly.

    Over indeterminates Y, X1..Xell: summing over subsets I = {i_1<...<i_k}
    the product of (X_{i_j} - Y^(i_j - j + 1)) weighted by
    Y^((ell-k)(ell-k+1)/2) collapses to X1*...*Xell. Returns canonical
    polynomial strings for the two sides, built independently.
    """
    ell = int(ell)
    if ell < 1:
        raise ValueError("need ell >= 1")
    lhs: Dict[Tuple[int, ...], int] = {}
    for k in range(ell + 1):
        for subset in itertools.combinations(range(1, ell + 1), k):
            pref = (ell - k) * (ell - k + 1) // 2
            terms = {(pref,) + (0,) * ell: 1}
            for j, idx in enumerate(subset, start=1):
                shift = idx - j + 1
                grown: Dict[Tuple[int, ...], int] = {}
                for key, coeff in terms.items():
                    with_x = list(key)
                    with_x[idx] += 1
                    _poly_add(grown, tuple(with_x), coeff)
                    with_y = list(key)
                    with_y[0] += shift
                    _poly_add(grown, tuple(with_y), -coeff)
                terms = grown
            for key, coeff in terms.items():
                _poly_add(lhs, key, coeff)
    rhs = {(0,) + (1,) * ell: 1}
    return _poly_string(lhs, ell), _poly_string(rhs, ell)
