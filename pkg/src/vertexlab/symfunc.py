"""Rational symmetric functions attached to the vertex weights, their skew
variants, specializations, probability measures, and Markov kernels.

Two evaluation routes coexist on purpose. The combinatorial route reads a
function value off a transfer-matrix sum over lattice path collections between
two signatures, one spectral parameter per row; it works for any inputs,
including coinciding parameters. The symmetrization route (``F_sym``,
``G_sym``) and the principal/degenerate specializations (``principal_F``,
``principal_G``, ``G_rho``) are closed forms for the same values at generic
points. The test suite pins each route against the others, so neither is
allowed to drift.

Identities whose left side is an infinite sum over signatures are checked by
``identity_suite`` as truncated sums with exact certified tail bounds: every
report row carries a rational ``tail_bound`` such that the discarded terms sum
to at most that much in absolute value, and the row passes when
``|lhs - rhs| <= tail_bound``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Dict, Iterable, List, Sequence, Tuple

from gmpy2 import mpq

from .exactcore import (
    ONE,
    ZERO,
    Rationalish,
    Signature,
    as_exact,
    exact_str,
    geometric_poly_tail,
    prod,
    q_pochhammer,
    signatures_bounded,
)
from .weights import ModelParams, RegimeError, VertexState, weight_w

__all__ = [
    "Specialization",
    "as_signature",
    "c_factor",
    "spectral_ratio",
    "is_admissible",
    "skew_F_one_row",
    "skew_G_one_row",
    "skew_F",
    "skew_G",
    "F_func",
    "G_func",
    "G_conj",
    "F_sym",
    "G_sym",
    "principal_F",
    "principal_G",
    "G_rho",
    "measure_weight",
    "kernel_lambda_minus",
    "kernel_lambda_circ",
    "kernel_q_plus",
    "kernel_q_circ",
    "identity_suite",
    "SUITE_KINDS",
]


def as_signature(parts) -> Signature:
    return parts if isinstance(parts, Signature) else Signature(parts)


def _as_values(xs: Sequence[Rationalish]) -> Tuple[mpq, ...]:
    return tuple(as_exact(x) for x in xs)


@dataclass(frozen=True)
class Specialization:
    """A substitution target for one spectral alphabet.

    kind "values" carries an explicit tuple; "principal" is the geometric
    tuple (base, q*base, ..., q^(length-1)*base), expanded on demand;
    "rho" is the degenerate specialization that only a few closed forms
    accept directly (``G_rho``, ``measure_weight``, ``kernel_q_plus``).
    """

    kind: str
    data: Tuple[mpq, ...] = ()
    length: int = 0

    @classmethod
    def values(cls, xs: Sequence[Rationalish]) -> "Specialization":
        return cls(kind="values", data=_as_values(xs), length=len(tuple(xs)))

    @classmethod
    def principal(cls, base: Rationalish, length: int) -> "Specialization":
        return cls(kind="principal", data=(as_exact(base),), length=int(length))

    @classmethod
    def rho(cls) -> "Specialization":
        return cls(kind="rho")

    def expand(self, q: mpq) -> Tuple[mpq, ...]:
        if self.kind == "values":
            return self.data
        if self.kind == "principal":
            base = self.data[0]
            return tuple(base * q**i for i in range(self.length))
        raise RegimeError("the rho specialization has no finite value tuple")


def _coerce_spec(spec) -> Specialization:
    if isinstance(spec, Specialization):
        return spec
    return Specialization.values(spec)


# ---------------------------------------------------------------------------
# Conjugation factor and admissibility.
# ---------------------------------------------------------------------------


def c_factor(params: ModelParams, nu) -> mpq:
    """Product over part values of (s^2; q)_m / (q; q)_m, m the multiplicity.

    Zero parts count. Only s^2 enters, so this works in product mode too.
    """
    nu = as_signature(nu)
    out = ONE
    for _value, m in nu.multiplicities().items():
        out *= q_pochhammer(params.s_sq, params.q, m) / q_pochhammer(
            params.q, params.q, m
        )
    return out


def spectral_ratio(params: ModelParams, x: Rationalish) -> mpq:
    """(x - s) / (1 - s x), the per-column transport factor."""
    s = params.require_s()
    x = as_exact(x)
    den = ONE - s * x
    if den == 0:
        raise RegimeError(f"spectral parameter {x} sits on the pole 1 - s*x = 0")
    return (x - s) / den


def is_admissible(params: ModelParams, us, vs) -> bool:
    """Whether |ratio(u) * ratio(v)| < 1 for every pair, the condition under
    which the signature sums in the Cauchy-type identities converge."""
    ratios_u = [abs(spectral_ratio(params, u)) for u in us]
    ratios_v = [abs(spectral_ratio(params, v)) for v in vs]
    return all(a * b < 1 for a in ratios_u for b in ratios_v)


# ---------------------------------------------------------------------------
# Combinatorial route: one-row transfer weights.
#
# A row is a list of vertices at columns x = 0, 1, ..., with the horizontal
# occupation between consecutive columns determined by flux conservation.
# Invalid (non-interlacing) signature pairs produce a vertex that violates
# arrow conservation or horizontal capacity, and weight_w returns zero there,
# so no validity precheck is needed.
# ---------------------------------------------------------------------------


def skew_G_one_row(params: ModelParams, v, top, bottom) -> mpq:
    """Weight of the unique one-row path collection bottom -> top where every
    path enters from below and exits above (equal lengths)."""
    top = as_signature(top)
    bottom = as_signature(bottom)
    if len(top) != len(bottom):
        raise ValueError("one-row G transfer preserves the number of parts")
    if len(top) == 0:
        return ONE
    v = as_exact(v)
    xmax = max(top[0], bottom[0])
    mult_b = bottom.multiplicities()
    mult_t = top.multiplicities()

    def j(x: int) -> int:
        return sum(1 for lo, hi in zip(bottom, top) if lo < x <= hi)

    out = ONE
    for x in range(xmax + 1):
        out *= weight_w(
            params,
            v,
            VertexState(mult_b.get(x, 0), j(x), mult_t.get(x, 0), j(x + 1)),
        )
        if out == 0:
            return ZERO
    return out


def skew_F_one_row(params: ModelParams, u, top, bottom) -> mpq:
    """One-row transfer with one extra path entering horizontally from the
    left; the top signature has one more part than the bottom."""
    top = as_signature(top)
    bottom = as_signature(bottom)
    m = len(bottom)
    if len(top) != m + 1:
        raise ValueError("one-row F transfer adds exactly one part")
    u = as_exact(u)
    xmax = max(top[0], bottom[0]) if m else top[0]
    mult_b = bottom.multiplicities()
    mult_t = top.multiplicities()
    newcomer = top[m]

    def j(x: int) -> int:
        horiz = 1 if x <= newcomer else 0
        horiz += sum(1 for lo, hi in zip(bottom, top) if lo < x <= hi)
        return horiz

    out = ONE
    for x in range(xmax + 1):
        out *= weight_w(
            params,
            u,
            VertexState(mult_b.get(x, 0), j(x), mult_t.get(x, 0), j(x + 1)),
        )
        if out == 0:
            return ZERO
    return out


def _interlacings_above_G(sig: Signature, cap: int) -> Iterable[Signature]:
    # Same length, parts grow: new_i in [sig_i, sig_{i-1}], new_1 up to cap.
    m = len(sig)
    if m == 0:
        yield sig
        return

    def rec(prefix: Tuple[int, ...], i: int):
        if i == m:
            yield Signature(prefix)
            return
        hi = cap if i == 0 else min(prefix[i - 1], sig[i - 1])
        for p in range(sig[i], hi + 1):
            yield from rec(prefix + (p,), i + 1)

    yield from rec((), 0)


def _interlacings_above_F(sig: Signature, cap: int) -> Iterable[Signature]:
    # One part longer: new_1 in [sig_1, cap], new_{i+1} in [sig_{i+1}, sig_i],
    # trailing new part in [0, sig_m].
    m = len(sig)

    def rec(prefix: Tuple[int, ...], i: int):
        if i == m + 1:
            yield Signature(prefix)
            return
        if i == 0:
            lo, hi = (sig[0], cap) if m else (0, cap)
        elif i < m:
            lo, hi = sig[i], sig[i - 1]
        else:
            lo, hi = 0, sig[m - 1]
        hi = min(hi, prefix[i - 1]) if i else hi
        for p in range(lo, hi + 1):
            yield from rec(prefix + (p,), i + 1)

    yield from rec((), 0)


def skew_F(params: ModelParams, us, top, bottom=()) -> mpq:
    """Multi-row transfer sum: one horizontal entry per row, row y carrying
    the y-th spectral parameter, bottom row first."""
    us = _as_values(us)
    top = as_signature(top)
    bottom = as_signature(bottom)
    if len(top) != len(bottom) + len(us):
        raise ValueError(
            f"need len(top) == len(bottom) + len(us), got "
            f"{len(top)} != {len(bottom)} + {len(us)}"
        )
    if not us:
        return ONE if top == bottom else ZERO
    cap = top[0]
    if bottom and bottom[0] > cap:
        return ZERO
    layer: Dict[Signature, mpq] = {bottom: ONE}
    for r, u in enumerate(us):
        last = r == len(us) - 1
        nxt: Dict[Signature, mpq] = {}
        for sig, val in layer.items():
            targets = (top,) if last else _interlacings_above_F(sig, cap)
            for t in targets:
                w = skew_F_one_row(params, u, t, sig)
                if w != 0:
                    nxt[t] = nxt.get(t, ZERO) + val * w
        layer = nxt
        if not layer:
            return ZERO
    return layer.get(top, ZERO)


def skew_G(params: ModelParams, vs, top, bottom) -> mpq:
    """Multi-row transfer sum preserving the number of parts."""
    vs = _as_values(vs)
    top = as_signature(top)
    bottom = as_signature(bottom)
    if len(top) != len(bottom):
        raise ValueError("G-type transfer preserves the number of parts")
    if not vs:
        return ONE if top == bottom else ZERO
    if len(top) == 0:
        return ONE
    cap = top[0]
    if bottom[0] > cap:
        return ZERO
    layer: Dict[Signature, mpq] = {bottom: ONE}
    for r, v in enumerate(vs):
        last = r == len(vs) - 1
        nxt: Dict[Signature, mpq] = {}
        for sig, val in layer.items():
            targets = (top,) if last else _interlacings_above_G(sig, cap)
            for t in targets:
                w = skew_G_one_row(params, v, t, sig)
                if w != 0:
                    nxt[t] = nxt.get(t, ZERO) + val * w
        layer = nxt
        if not layer:
            return ZERO
    return layer.get(top, ZERO)


def F_func(params: ModelParams, us, mu) -> mpq:
    """Combinatorial-route value with empty bottom boundary; needs exactly
    len(mu) spectral parameters."""
    mu = as_signature(mu)
    return skew_F(params, us, mu, Signature(()))


def G_func(params: ModelParams, vs, nu) -> mpq:
    """Combinatorial-route value with fully packed bottom boundary 0^n."""
    nu = as_signature(nu)
    return skew_G(params, vs, nu, Signature((0,) * len(nu)))


def G_conj(params: ModelParams, vs, nu) -> mpq:
    """G_func times c_factor(nu)/c_factor(0^n), the normalization under which
    the Cauchy and Pieri identities close."""
    nu = as_signature(nu)
    zeros = Signature((0,) * len(nu))
    return G_func(params, vs, nu) * c_factor(params, nu) / c_factor(params, zeros)


def _skew_F_conj(params: ModelParams, us, top, bottom) -> mpq:
    top, bottom = as_signature(top), as_signature(bottom)
    ratio = c_factor(params, top) / c_factor(params, bottom)
    return ratio * skew_F(params, us, top, bottom)


def _skew_G_conj(params: ModelParams, vs, top, bottom) -> mpq:
    top, bottom = as_signature(top), as_signature(bottom)
    ratio = c_factor(params, top) / c_factor(params, bottom)
    return ratio * skew_G(params, vs, top, bottom)


# ---------------------------------------------------------------------------
# Symmetrization route.
# ---------------------------------------------------------------------------


def _require_distinct(xs: Tuple[mpq, ...], name: str) -> None:
    if len(set(xs)) != len(xs):
        raise RegimeError(
            f"{name} must be pairwise distinct for the symmetrized form; "
            "use the transfer route for coinciding parameters"
        )


def F_sym(params: ModelParams, us, mu) -> mpq:
    """Symmetrized closed form for F_func at pairwise distinct parameters."""
    s = params.require_s()
    q = params.q
    us = _as_values(us)
    mu = as_signature(mu)
    M = len(us)
    if len(mu) != M:
        raise ValueError("F_sym needs len(us) == len(mu)")
    if M == 0:
        return ONE
    _require_distinct(us, "spectral parameters")
    pref = (ONE - q) ** M / prod(ONE - s * u for u in us)
    total = ZERO
    for w in itertools.permutations(us):
        cross = ONE
        for a in range(M):
            for b in range(a + 1, M):
                cross *= (w[a] - q * w[b]) / (w[a] - w[b])
        amp = prod(spectral_ratio(params, w[i]) ** mu[i] for i in range(M))
        total += cross * amp
    return pref * total


def G_sym(params: ModelParams, vs, nu) -> mpq:
    """Symmetrized closed form for G_func; the number of parameters may
    exceed the number of parts."""
    s = params.require_s()
    q = params.q
    vs = _as_values(vs)
    nu = as_signature(nu)
    N = len(vs)
    n = len(nu)
    k = nu.multiplicity(0)
    if N < n - k:
        return ZERO
    if N == 0:
        return ONE
    _require_distinct(vs, "spectral parameters")
    for v in vs:
        if ONE - s * v == 0:
            raise RegimeError(f"parameter {v} sits on the pole 1 - s*v = 0")
    pref = q_pochhammer(params.s_sq, q, n) / (
        q_pochhammer(q, q, N - n + k) * q_pochhammer(params.s_sq, q, k)
    )
    pref *= (ONE - q) ** N / prod(ONE - s * v for v in vs)
    total = ZERO
    for w in itertools.permutations(vs):
        cross = ONE
        for a in range(N):
            for b in range(a + 1, N):
                cross *= (w[a] - q * w[b]) / (w[a] - w[b])
        body = ONE
        for j in range(n - k):
            # nu[j] >= 1 here, so the pole of w/(w - s) cancels against the
            # transport power; keep the combined form to stay exact at w = s.
            body *= w[j] * (w[j] - s) ** (nu[j] - 1) / (ONE - s * w[j]) ** nu[j]
        for j in range(n - k, N):
            body *= ONE - s * q**k * w[j]
        total += cross * body
    return pref * total


def principal_F(params: ModelParams, u, mu) -> mpq:
    """Value of F_func on the geometric tuple (u, qu, ..., q^(M-1)u)."""
    s = params.require_s()
    q = params.q
    u = as_exact(u)
    mu = as_signature(mu)
    M = len(mu)
    den = q_pochhammer(s * u, q, M)
    if den == 0:
        raise RegimeError("principal specialization hits the pole (su; q)_M = 0")
    out = q_pochhammer(q, q, M) / den
    for i in range(M):
        out *= spectral_ratio(params, q**i * u) ** mu[i]
    return out


def principal_G(params: ModelParams, v, N, nu) -> mpq:
    """Value of G_func on the geometric tuple (v, qv, ..., q^(N-1)v)."""
    s = params.require_s()
    q = params.q
    v = as_exact(v)
    if v == 0:
        raise RegimeError("principal G specialization needs a nonzero base")
    nu = as_signature(nu)
    N = int(N)
    n = len(nu)
    k = nu.multiplicity(0)
    if N < n - k:
        return ZERO
    s_sq = params.s_sq
    denoms = (
        q_pochhammer(s * v, q, n)
        * q_pochhammer(s * v, q, N)
        * q_pochhammer(s_sq, q, k)
        * q_pochhammer(s / v, 1 / q, n - k)
    )
    if denoms == 0:
        raise RegimeError("principal G specialization hits a vanishing factor")
    out = (
        q_pochhammer(q, q, N)
        / q_pochhammer(q, q, N - n + k)
        * q_pochhammer(s * v, q, N + k)
        * q_pochhammer(s_sq, q, n)
        / denoms
    )
    for j in range(n):
        out *= spectral_ratio(params, q**j * v) ** nu[j]
    return out


def G_rho(params: ModelParams, nu) -> mpq:
    """Degenerate specialization of G_func: vanishes unless every part is
    positive, otherwise (-s)^|nu| (s^2; q)_n / s^(2n)."""
    s = params.require_s()
    nu = as_signature(nu)
    n = len(nu)
    if n and nu[n - 1] == 0:
        return ZERO
    return (-s) ** nu.weight() * q_pochhammer(params.s_sq, params.q, n) / s ** (2 * n)


# ---------------------------------------------------------------------------
# Measures and Markov kernels.
# ---------------------------------------------------------------------------


def measure_weight(params: ModelParams, us, vspec, nu) -> mpq:
    """Normalized two-alphabet weight of a signature.

    With an explicit second alphabet this is F(nu) G_conj(nu) divided by the
    closed-form partition function; admissibility is the caller's business.
    With the rho specialization the normalized weight collapses to a single
    conjugated F value at the shifted signature.
    """
    s = params.require_s()
    q = params.q
    us = _as_values(us)
    nu = as_signature(nu)
    n = len(nu)
    if len(us) != n:
        raise ValueError("measure needs len(us) == len(nu)")
    vspec = _coerce_spec(vspec)
    if vspec.kind == "rho":
        if n == 0:
            return ONE
        if nu[n - 1] < 1:
            return ZERO
        shifted = nu.shifted(-1)
        # distinct parameters take the symmetrized closed form, much cheaper
        # than the transfer route when signatures are enumerated in bulk
        F = F_sym if len(set(us)) == len(us) else F_func
        return (-s) ** (nu.weight() - n) * c_factor(params, shifted) * F(
            params, us, shifted
        )
    vs = vspec.expand(q)
    z = q_pochhammer(q, q, n)
    for u in us:
        z /= ONE - s * u
        for v in vs:
            z *= (ONE - q * u * v) / (ONE - u * v)
    return F_func(params, us, nu) * G_conj(params, vs, nu) / z


def kernel_lambda_minus(params: ModelParams, us, u, top, bottom) -> mpq:
    """Backward contraction kernel: removes the row with parameter u.

    top has len(us) + 1 parts, bottom has len(us).
    """
    us = _as_values(us)
    u = as_exact(u)
    top = as_signature(top)
    bottom = as_signature(bottom)
    if len(top) != len(us) + 1 or len(bottom) != len(us):
        raise ValueError("kernel shape: len(top) == len(us) + 1 == len(bottom) + 1")
    den = F_func(params, us + (u,), top)
    if den == 0:
        raise RegimeError("contraction kernel undefined: F(top) vanishes")
    return F_func(params, us, bottom) * skew_F_one_row(params, u, top, bottom) / den


def kernel_lambda_circ(params: ModelParams, vs, v, top, bottom) -> mpq:
    """Backward contraction kernel on the second alphabet (equal lengths)."""
    vs = _as_values(vs)
    v = as_exact(v)
    top = as_signature(top)
    bottom = as_signature(bottom)
    if len(top) != len(bottom):
        raise ValueError("kernel preserves the number of parts")
    den = G_conj(params, vs + (v,), top)
    if den == 0:
        raise RegimeError("contraction kernel undefined: G(top) vanishes")
    num = G_conj(params, vs, bottom) * _skew_G_conj(params, (v,), top, bottom)
    return num / den


def kernel_q_plus(params: ModelParams, u, vspec, bottom, top) -> mpq:
    """Forward transition kernel adding one part, driven by parameter u."""
    s = params.require_s()
    q = params.q
    u = as_exact(u)
    bottom = as_signature(bottom)
    top = as_signature(top)
    m = len(bottom)
    if len(top) != m + 1:
        raise ValueError("forward kernel adds exactly one part")
    vspec = _coerce_spec(vspec)
    if vspec.kind == "rho":
        # the degenerate second alphabet puts no mass on zero parts, so the
        # kernel is supported on strictly positive targets
        if top[m] < 1:
            return ZERO
        pref = (ONE - s * u) / (s * (s - u))
        return (
            pref
            * (-s) ** (top.weight() - bottom.weight())
            * _skew_F_conj(params, (u,), top, bottom)
        )
    vs = vspec.expand(q)
    pref = (ONE - s * u) / (ONE - q ** (m + 1))
    for v in vs:
        pref *= (ONE - u * v) / (ONE - q * u * v)
    ratio = G_conj(params, vs, top) / G_conj(params, vs, bottom)
    return pref * ratio * skew_F_one_row(params, u, top, bottom)


def kernel_q_circ(params: ModelParams, us, v, bottom, top) -> mpq:
    """Forward transition kernel on the second alphabet (equal lengths)."""
    q = params.q
    us = _as_values(us)
    v = as_exact(v)
    bottom = as_signature(bottom)
    top = as_signature(top)
    if len(top) != len(bottom) or len(us) != len(bottom):
        raise ValueError("forward kernel shape: len(us) == len(top) == len(bottom)")
    den = F_func(params, us, bottom)
    if den == 0:
        raise RegimeError("forward kernel undefined: F(bottom) vanishes")
    pref = ONE
    for u in us:
        pref *= (ONE - u * v) / (ONE - q * u * v)
    num = F_func(params, us, top) * _skew_G_conj(params, (v,), top, bottom)
    return pref * num / den


# ---------------------------------------------------------------------------
# Exact tail certificates.
#
# Everything below computes rational constants K, r with |value| <= K * r^w,
# w the signature weight, from which a discarded tail over signatures with a
# part above the cutoff is at most K' * sum_{W > C} (W+1)^d r^W, evaluated
# exactly by geometric_poly_tail. Constants are deliberately generous;
# correctness matters, tightness costs only a slightly larger cutoff.
# ---------------------------------------------------------------------------


def _max1(x: mpq) -> mpq:
    return x if x > 1 else ONE


def _partitions(total: int):
    def rec(rest: int, cap: int):
        if rest == 0:
            yield ()
            return
        for p in range(min(rest, cap), 0, -1):
            for tail in rec(rest - p, p):
                yield (p,) + tail

    yield from rec(total, total)


def _c_factor_bound(params: ModelParams, length: int) -> mpq:
    """Max of |c_factor| over signatures with the given number of parts."""
    best = ONE if length == 0 else ZERO
    for shape in _partitions(length):
        val = prod(
            abs(
                q_pochhammer(params.s_sq, params.q, m)
                / q_pochhammer(params.q, params.q, m)
            )
            for m in shape
        )
        if val > best:
            best = val
    return best


def _max_cross(q: mpq, xs: Tuple[mpq, ...]) -> mpq:
    best = ONE
    for w in itertools.permutations(xs):
        val = ONE
        for a in range(len(w)):
            for b in range(a + 1, len(w)):
                val *= abs((w[a] - q * w[b]) / (w[a] - w[b]))
        if val > best:
            best = val
    return best


def _sym_F_bound(params: ModelParams, us: Tuple[mpq, ...]) -> Tuple[mpq, mpq]:
    """(K, A) with |F_func(us, mu)| <= K * A^|mu| for all mu."""
    s = params.require_s()
    M = len(us)
    if M == 0:
        return ONE, ZERO
    _require_distinct(us, "tail-certificate parameters")
    K = (
        abs(ONE - params.q) ** M
        / prod(abs(ONE - s * u) for u in us)
        * factorial(M)
        * _max_cross(params.q, us)
    )
    A = max(abs(spectral_ratio(params, u)) for u in us)
    return K, A


def _sym_Gc_bound(
    params: ModelParams, vs: Tuple[mpq, ...], length: int
) -> Tuple[mpq, mpq]:
    """(K, B) with |G_conj(vs, nu)| <= K * B^|nu| for nu of the given length."""
    s = params.require_s()
    q = params.q
    N = len(vs)
    M = length
    if M == 0 or N == 0:
        return ONE, ZERO
    _require_distinct(vs, "tail-certificate parameters")
    for v in vs:
        if v == s:
            raise RegimeError("tail certificate needs every parameter distinct from s")
    pref_max = ZERO
    for k in range(max(0, M - N), M + 1):
        val = abs(
            q_pochhammer(params.s_sq, q, M)
            / (q_pochhammer(q, q, N - M + k) * q_pochhammer(params.s_sq, q, k))
        )
        if val > pref_max:
            pref_max = val
    c1 = max(_max1(abs(v / (v - s))) for v in vs)
    c2 = max(
        _max1(abs(ONE - s * q**k * v)) for v in vs for k in range(M + 1)
    )
    K = (
        pref_max
        * abs(ONE - q) ** N
        / prod(abs(ONE - s * v) for v in vs)
        * factorial(N)
        * _max_cross(q, vs)
        * c1**M
        * c2**N
    )
    zeros = Signature((0,) * M)
    K *= _c_factor_bound(params, M) / abs(c_factor(params, zeros))
    B = max(abs(spectral_ratio(params, v)) for v in vs)
    return K, B


def _one_row_bound(params: ModelParams, x: mpq, nparts: int) -> Tuple[mpq, mpq]:
    """(K, r) with |one-row transfer weight| <= K * r^(weight gain), covering
    both the F and G variants for signatures with at most nparts parts."""
    s = params.require_s()
    q = params.q
    den = abs(ONE - s * x)
    if den == 0:
        raise RegimeError(f"parameter {x} sits on the pole 1 - s*x = 0")
    r = abs(spectral_ratio(params, x))
    if r == 0:
        raise RegimeError(
            "tail certificate needs a nonzero transport ratio (parameter != s)"
        )
    P = nparts + 2
    pass_max = max(
        (_max1(abs((ONE - s * q**g * x)) / den) for g in range(1, P + 1)),
        default=ONE,
    )
    emit_max = max(
        (_max1(abs((ONE - params.s_sq * q**g) * x) / den) for g in range(P + 1)),
        default=ONE,
    )
    absorb_max = max(
        (_max1(abs(ONE - q ** (g + 1)) / den) for g in range(P + 1)), default=ONE
    )
    # a travel step over an occupied column costs its own factor instead of
    # the generic ratio r; only the quotient needs compensating
    travel_comp = max(
        (_max1(abs((x - s * q**g)) / den / r) for g in range(1, P + 1)),
        default=ONE,
    )
    K = (pass_max * emit_max * absorb_max * travel_comp) ** P * _max1(r)
    return K, r


def _chain_bound(
    params: ModelParams, xs: Tuple[mpq, ...], nparts: int
) -> Tuple[mpq, int, mpq]:
    """(K, D, r) with |multi-row skew transfer| <= K (W+1)^D r^(weight gain),
    W the top signature weight; D counts the intermediate enumeration."""
    K = ONE
    r = ZERO
    for x in xs:
        k1, r1 = _one_row_bound(params, x, nparts)
        K *= k1
        if r1 > r:
            r = r1
    D = max(0, (len(xs) - 1)) * nparts
    return K, D, r


# ---------------------------------------------------------------------------
# Identity suite.
# ---------------------------------------------------------------------------

SUITE_KINDS = (
    "cauchy",
    "skew_cauchy",
    "pieri_F",
    "pieri_G",
    "branching",
    "shift",
    "eigenrelation",
    "commutation",
    "moment_recombination",
)


def _instance(inputs: dict, lhs: mpq, rhs: mpq, tail: mpq) -> dict:
    return {
        "inputs": inputs,
        "lhs": exact_str(lhs),
        "rhs": exact_str(rhs),
        "tail_bound": exact_str(tail),
        "pass": abs(lhs - rhs) <= tail,
    }


def _sig_str(sig: Signature) -> str:
    return "(" + ",".join(str(p) for p in sig.parts) + ")"


def _require_admissible(params: ModelParams, us, vs) -> None:
    if not is_admissible(params, us, vs):
        raise RegimeError(
            "inadmissible parameters: need |(u-s)(v-s)/((1-su)(1-sv))| < 1 "
            "for every pair, or the signature sums diverge"
        )


def _suite_cauchy(params, us, vs, cutoff) -> List[dict]:
    s = params.require_s()
    q = params.q
    M = len(us)
    if M == 0:
        raise ValueError("cauchy suite needs at least one u parameter")
    _require_admissible(params, us, vs)
    lhs = ZERO
    for mu in signatures_bounded(M, cutoff):
        lhs += F_func(params, us, mu) * G_conj(params, vs, mu)
    rhs = q_pochhammer(q, q, M)
    for u in us:
        rhs /= ONE - s * u
        for v in vs:
            rhs *= (ONE - q * u * v) / (ONE - u * v)
    kf, a = _sym_F_bound(params, us)
    kg, b = _sym_Gc_bound(params, vs, M)
    tail = kf * kg * geometric_poly_tail(a * b, M - 1, cutoff + 1)
    inputs = {"us": list(map(exact_str, us)), "vs": list(map(exact_str, vs))}
    return [_instance(inputs, lhs, rhs, tail)]


def _suite_skew_cauchy(params, us, vs, cutoff) -> List[dict]:
    q = params.q
    M = len(us)
    if M == 0 or not vs:
        raise ValueError("skew cauchy suite needs both alphabets")
    _require_admissible(params, us, vs)
    N = 1
    nu = Signature((1,))
    lam = Signature(tuple(range(M, -1, -1)))  # length M + 1 = N + M
    big = N + M

    lhs = ZERO
    for kappa in signatures_bounded(big, cutoff):
        g = _skew_G_conj(params, vs, kappa, lam)
        if g == 0:
            continue
        lhs += g * skew_F(params, us, kappa, nu)

    cross = ONE
    for u in us:
        for v in vs:
            cross *= (ONE - q * u * v) / (ONE - u * v)
    # The inner sum runs over signatures below both fixed boundaries.
    rhs = ZERO
    for mu in signatures_bounded(N, min(nu[0], lam[0])):
        f = skew_F(params, us, lam, mu)
        if f == 0:
            continue
        rhs += f * _skew_G_conj(params, vs, nu, mu)
    rhs *= cross

    kg, dg, rg = _chain_bound(params, vs, big)
    kf, df, rf = _chain_bound(params, us, big)
    kc = _c_factor_bound(params, big) / abs(c_factor(params, lam))
    rho = rf * rg
    if not rho < 1:
        raise RegimeError("tail certificate needs max|ratio_u| * max|ratio_v| < 1")
    degree = dg + df + big - 1
    scale = kc * kg * kf * rg ** (-lam.weight()) * rf ** (-nu.weight())
    tail = scale * geometric_poly_tail(rho, degree, cutoff + 1)
    inputs = {
        "us": list(map(exact_str, us)),
        "vs": list(map(exact_str, vs)),
        "nu": _sig_str(nu),
        "lambda": _sig_str(lam),
    }
    return [_instance(inputs, lhs, rhs, tail)]


def _suite_pieri_F(params, us, vs, cutoff) -> List[dict]:
    q = params.q
    if len(vs) != 1:
        raise ValueError("pieri_F suite takes a single v parameter")
    v = vs[0]
    N = len(us)
    if N == 0:
        raise ValueError("pieri_F suite needs at least one u parameter")
    _require_admissible(params, us, vs)
    kf, a = _sym_F_bound(params, us)
    k1, b = _one_row_bound(params, v, N)
    kc = _c_factor_bound(params, N)
    out = []
    lams = [Signature((0,) * N), Signature((2,) + (1,) * (N - 1))]
    for lam in lams:
        lhs = ZERO
        for kappa in signatures_bounded(N, cutoff):
            g = _skew_G_conj(params, (v,), kappa, lam)
            if g == 0:
                continue
            lhs += g * F_func(params, us, kappa)
        rhs = F_func(params, us, lam)
        for u in us:
            rhs *= (ONE - q * u * v) / (ONE - u * v)
        scale = kc / abs(c_factor(params, lam)) * k1 * kf * b ** (-lam.weight())
        tail = scale * geometric_poly_tail(a * b, N - 1, cutoff + 1)
        inputs = {
            "us": list(map(exact_str, us)),
            "v": exact_str(v),
            "lambda": _sig_str(lam),
        }
        out.append(_instance(inputs, lhs, rhs, tail))
    return out


def _suite_pieri_G(params, us, vs, cutoff) -> List[dict]:
    s = params.require_s()
    q = params.q
    if len(us) != 1:
        raise ValueError("pieri_G suite takes a single u parameter")
    u = us[0]
    if not vs:
        raise ValueError("pieri_G suite needs at least one v parameter")
    _require_admissible(params, us, vs)
    out = []
    for nu in (Signature((0,)), Signature((2,)), Signature((2, 1))):
        n = len(nu)
        lhs = ZERO
        for kappa in signatures_bounded(n + 1, cutoff):
            g = G_conj(params, vs, kappa)
            if g == 0:
                continue
            lhs += g * skew_F_one_row(params, u, kappa, nu)
        rhs = (ONE - q ** (n + 1)) / (ONE - s * u) * G_conj(params, vs, nu)
        for v in vs:
            rhs *= (ONE - q * u * v) / (ONE - u * v)
        kg, bmax = _sym_Gc_bound(params, vs, n + 1)
        k1, a = _one_row_bound(params, u, n + 1)
        scale = kg * k1 * a ** (-nu.weight())
        tail = scale * geometric_poly_tail(a * bmax, n, cutoff + 1)
        inputs = {
            "u": exact_str(u),
            "vs": list(map(exact_str, vs)),
            "nu": _sig_str(nu),
        }
        out.append(_instance(inputs, lhs, rhs, tail))
    return out


def _suite_branching(params, us, vs, cutoff) -> List[dict]:
    del cutoff  # finite identity, nothing discarded
    out = []
    n = len(us)
    if n >= 2:
        mu = Signature(tuple(range(n - 1, -1, -1)))
        full = F_sym(params, us, mu)
        for n1 in range(1, n):
            total = ZERO
            for kappa in signatures_bounded(n1, mu[0]):
                f_low = F_sym(params, us[:n1], kappa)
                if f_low == 0:
                    continue
                total += skew_F(params, us[n1:], mu, kappa) * f_low
            inputs = {
                "family": "F",
                "us": list(map(exact_str, us)),
                "mu": _sig_str(mu),
                "split": n1,
            }
            out.append(_instance(inputs, total, full, ZERO))
    if len(vs) >= 2:
        nu = Signature((2, 1))
        full = G_sym(params, vs, nu)
        for n1 in range(1, len(vs)):
            total = ZERO
            for kappa in signatures_bounded(len(nu), nu[0]):
                g_low = G_sym(params, vs[:n1], kappa)
                if g_low == 0:
                    continue
                total += skew_G(params, vs[n1:], nu, kappa) * g_low
            inputs = {
                "family": "G",
                "vs": list(map(exact_str, vs)),
                "nu": _sig_str(nu),
                "split": n1,
            }
            out.append(_instance(inputs, total, full, ZERO))
    if not out:
        raise ValueError("branching suite needs at least two parameters")
    return out


def _suite_shift(params, us, vs, cutoff) -> List[dict]:
    del vs, cutoff
    M = len(us)
    if M == 0:
        raise ValueError("shift suite needs at least one u parameter")
    mu = Signature(tuple(range(M - 1, -1, -1)))
    base = F_func(params, us, mu)
    factor = prod(spectral_ratio(params, u) for u in us)
    out = []
    for r in (1, 2, 3):
        lhs = F_func(params, us, mu.shifted(r))
        rhs = factor**r * base
        inputs = {"us": list(map(exact_str, us)), "mu": _sig_str(mu), "r": r}
        out.append(_instance(inputs, lhs, rhs, ZERO))
    return out


def _suite_eigenrelation(params, us, vs, cutoff) -> List[dict]:
    q = params.q
    m = len(us)
    if m == 0 or len(vs) != m + 1:
        raise ValueError(
            "eigenrelation suite needs len(vs) == len(us) + 1: the kernel "
            "parameter first, then one eigenfunction argument per u"
        )
    v, zs = vs[0], vs[1:]
    _require_admissible(params, zs, (v,))
    out = []
    mus = [Signature((0,) * m), Signature((2,) + (1,) * (m - 1))]
    for mu in mus:
        f_mu_u = F_func(params, us, mu)
        if f_mu_u == 0:
            raise RegimeError("eigenfunction undefined: F(mu) vanishes at us")
        lhs = ZERO
        for nu in signatures_bounded(m, cutoff):
            kern = kernel_q_circ(params, us, v, mu, nu)
            if kern == 0:
                continue
            f_nu_u = F_func(params, us, nu)
            if f_nu_u == 0:
                raise RegimeError("eigenfunction undefined: F(nu) vanishes at us")
            lhs += kern * F_func(params, zs, nu) / f_nu_u
        rhs = F_func(params, zs, mu) / f_mu_u
        for z in zs:
            rhs *= (ONE - q * z * v) / (ONE - z * v)
        for u in us:
            rhs *= (ONE - u * v) / (ONE - q * u * v)
        kfz, az = _sym_F_bound(params, zs)
        k1, bv = _one_row_bound(params, v, m)
        kc = _c_factor_bound(params, m) / abs(c_factor(params, mu))
        pref = prod(abs((ONE - u * v) / (ONE - q * u * v)) for u in us) / abs(f_mu_u)
        scale = pref * kc * k1 * kfz * bv ** (-mu.weight())
        tail = scale * geometric_poly_tail(az * bv, m - 1, cutoff + 1)
        inputs = {
            "us": list(map(exact_str, us)),
            "v": exact_str(v),
            "zs": list(map(exact_str, zs)),
            "mu": _sig_str(mu),
        }
        out.append(_instance(inputs, lhs, rhs, tail))
    return out


def _suite_commutation(params, us, vs, cutoff) -> List[dict]:
    q = params.q
    if len(us) < 2 or len(vs) != 1:
        raise ValueError(
            "commutation suite needs at least two u parameters and a single v"
        )
    ubar, u = us[:-1], us[-1]
    v = vs[0]
    m = len(ubar)
    _require_admissible(params, (u,), (v,))
    nu = Signature((2,) + (1,) * m)
    mu = Signature((1,) * m)
    lhs = ZERO
    for lam in signatures_bounded(m + 1, cutoff):
        kern = kernel_q_circ(params, us, v, nu, lam)
        if kern == 0:
            continue
        lhs += kern * kernel_lambda_minus(params, ubar, u, lam, mu)
    rhs = ZERO
    for kappa in signatures_bounded(m, nu[0]):
        kern = kernel_lambda_minus(params, ubar, u, nu, kappa)
        if kern == 0:
            continue
        rhs += kern * kernel_q_circ(params, ubar, v, kappa, mu)

    k1g, bv = _one_row_bound(params, v, m + 1)
    k1f, au = _one_row_bound(params, u, m + 1)
    kc = _c_factor_bound(params, m + 1) / abs(c_factor(params, nu))
    f_nu = F_func(params, us, nu)
    f_mu = F_func(params, ubar, mu)
    if f_nu == 0 or f_mu == 0:
        raise RegimeError("commutation suite hit a vanishing normalization")
    pref = prod(abs((ONE - w * v) / (ONE - q * w * v)) for w in us)
    pref *= abs(f_mu / f_nu)
    scale = pref * kc * k1g * k1f * bv ** (-nu.weight()) * au ** (-mu.weight())
    tail = scale * geometric_poly_tail(au * bv, m, cutoff + 1)
    inputs = {
        "us": list(map(exact_str, us)),
        "v": exact_str(v),
        "nu": _sig_str(nu),
        "mu": _sig_str(mu),
    }
    return [_instance(inputs, lhs, rhs, tail)]


def _suite_moment_recombination(params, us, vs, cutoff) -> List[dict]:
    del us, vs, cutoff
    from .residues import recombination_polynomial_sides

    out = []
    for ell in range(1, 5):
        lhs_poly, rhs_poly = recombination_polynomial_sides(ell)
        ok = lhs_poly == rhs_poly
        out.append(
            {
                "inputs": {"ell": ell},
                "lhs": lhs_poly,
                "rhs": rhs_poly,
                "tail_bound": "0",
                "pass": ok,
            }
        )
    return out


_SUITES = {
    "cauchy": _suite_cauchy,
    "skew_cauchy": _suite_skew_cauchy,
    "pieri_F": _suite_pieri_F,
    "pieri_G": _suite_pieri_G,
    "branching": _suite_branching,
    "shift": _suite_shift,
    "eigenrelation": _suite_eigenrelation,
    "commutation": _suite_commutation,
    "moment_recombination": _suite_moment_recombination,
}


def identity_suite(
    kind: str,
    params: ModelParams,
    us: Sequence[Rationalish] = (),
    vs: Sequence[Rationalish] = (),
    cutoff: int = 8,
) -> dict:
    """Run one family of identity checks and return a JSON-ready report.

    Infinite signature sums are truncated at parts <= cutoff; each instance
    carries an exact bound on what the truncation discarded and passes when
    |lhs - rhs| <= tail_bound. Finite identities report a zero bound.
    """
    if kind not in _SUITES:
        raise ValueError(f"unknown suite kind {kind!r}; choose from {SUITE_KINDS}")
    us = _as_values(us)
    vs = _as_values(vs)
    cutoff = int(cutoff)
    if cutoff < 1:
        raise ValueError("cutoff must be a positive integer")
    instances = _SUITES[kind](params, us, vs, cutoff)
    if kind == "moment_recombination":
        s_repr = exact_str(params.s) if params.s is not None else None
    else:
        s_repr = exact_str(params.require_s())
    report = {
        "suite": kind,
        "params": {
            "q": exact_str(params.q),
            "s": s_repr,
            "cutoff": cutoff,
        },
        "instances": instances,
    }
    return report
