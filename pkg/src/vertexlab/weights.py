"""Vertex weight families: plain, conjugated, stochastic, fused, and the
beta-binomial local laws, plus the commutation (train-crossing) consistency
check used to certify the weight tables.

Two parameter modes are supported. Full mode stores (q, s) and exposes every
family. Product mode stores only (q, s^2) and interprets spectral arguments
as the product su; the stochastic families depend on (su, s^2) alone, which
is what makes an exact treatment of the s = q^{-1/2} specialization possible
without materializing square roots.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from gmpy2 import mpq

from .exactcore import ONE, ZERO, Rationalish, as_exact, q_pochhammer

__all__ = [
    "ModelParams",
    "VertexState",
    "FusedSpin",
    "RegimeError",
    "weight_w",
    "weight_w_conj",
    "weight_L",
    "weight_L_row",
    "weight_L_fused",
    "weight_L_fused_row",
    "fusion_collapse_oracle",
    "phi_beta_binomial",
    "phi_nonneg_region",
    "six_vertex_weights",
    "yang_baxter_check",
]


class RegimeError(ValueError):
    """Parameters outside the validity region of the requested model."""


class ModelParams(NamedTuple):
    """q plus either s directly (full mode) or only s^2 (product mode)."""

    q: mpq
    s_sq: mpq
    s: Optional[mpq] = None

    @classmethod
    def from_qs(cls, q: Rationalish, s: Rationalish) -> "ModelParams":
        q = as_exact(q)
        s = as_exact(s)
        if q == 0 or s == 0:
            raise RegimeError("parameters q and s must be nonzero")
        return cls(q=q, s_sq=s * s, s=s)

    @classmethod
    def from_q_ssq(cls, q: Rationalish, s_sq: Rationalish) -> "ModelParams":
        q = as_exact(q)
        s_sq = as_exact(s_sq)
        if q == 0 or s_sq == 0:
            raise RegimeError("parameters q and s^2 must be nonzero")
        return cls(q=q, s_sq=s_sq, s=None)

    @property
    def su_mode(self) -> bool:
        return self.s is None

    def require_s(self) -> mpq:
        if self.s is None:
            raise RegimeError("this weight family needs s itself, not just s^2")
        return self.s

    def spectral_product(self, u: Rationalish) -> mpq:
        """The product su: in product mode the argument already carries it."""
        u = as_exact(u)
        return u if self.s is None else self.s * u


class VertexState(NamedTuple):
    i1: int
    j1: int
    i2: int
    j2: int

    def conserves(self) -> bool:
        return (
            self.i1 >= 0
            and self.j1 >= 0
            and self.i2 >= 0
            and self.j2 >= 0
            and self.i1 + self.j1 == self.i2 + self.j2
        )


class FusedSpin(NamedTuple):
    """Horizontal spin parameter: the value q^J, with J recorded when integral."""

    qJ: mpq
    J_int: Optional[int] = None

    @classmethod
    def from_J(cls, q: Rationalish, J: int) -> "FusedSpin":
        J = int(J)
        if J < 1:
            raise ValueError("integer spin J must be >= 1")
        return cls(qJ=as_exact(q) ** J, J_int=J)

    @classmethod
    def from_qJ(cls, qJ: Rationalish) -> "FusedSpin":
        return cls(qJ=as_exact(qJ), J_int=None)


def weight_w(params: ModelParams, u: Rationalish, state: VertexState) -> mpq:
    """Plain vertex weight; zero off the four-configuration table."""
    s = params.require_s()
    q = params.q
    u = as_exact(u)
    if not state.conserves() or state.j1 > 1 or state.j2 > 1:
        return ZERO
    den = ONE - s * u
    if den == 0:
        raise RegimeError("degenerate parameters: su = 1")
    i1, j1, i2, j2 = state
    if j1 == 0 and j2 == 0:  # (g,0;g,0)
        return (ONE - s * q**i1 * u) / den
    if j1 == 0 and j2 == 1:  # (g+1,0;g,1)
        return (ONE - params.s_sq * q**i2) * u / den
    if j1 == 1 and j2 == 1:  # (g,1;g,1)
        return (u - s * q**i1) / den
    # (g,1;g+1,0)
    return (ONE - q**i2) / den


def _conj_factor(params: ModelParams, i1: int, i2: int) -> mpq:
    q, ssq = params.q, params.s_sq
    num = q_pochhammer(ssq, q, i2) * q_pochhammer(q, q, i1)
    den = q_pochhammer(q, q, i2) * q_pochhammer(ssq, q, i1)
    if den == 0:
        raise RegimeError("degenerate spin value: vanishing conjugation factor")
    return num / den


def weight_w_conj(params: ModelParams, u: Rationalish, state: VertexState) -> mpq:
    w = weight_w(params, u, state)
    if w == 0:
        return ZERO
    return _conj_factor(params, state.i1, state.i2) * w


def weight_L(params: ModelParams, u: Rationalish, state: VertexState) -> mpq:
    """Stochastic weight. Depends on (su, s^2) only, so works in product mode."""
    if not state.conserves() or state.j1 > 1 or state.j2 > 1:
        return ZERO
    q, ssq = params.q, params.s_sq
    t = params.spectral_product(u)
    den = ONE - t
    if den == 0:
        raise RegimeError("degenerate parameters: su = 1")
    i1, j1, i2, j2 = state
    if j1 == 0 and j2 == 0:
        return (ONE - q**i1 * t) / den
    if j1 == 0 and j2 == 1:
        return -t * (ONE - q**i1) / den
    if j1 == 1 and j2 == 1:
        return (ssq * q**i1 - t) / den
    return (ONE - ssq * q**i1) / den


def weight_L_row(params: ModelParams, u: Rationalish, i1: int, j1: int):
    """All conserving outputs (i2, j2) with their stochastic weights."""
    out = []
    for j2 in (0, 1):
        i2 = i1 + j1 - j2
        if i2 >= 0:
            out.append(((i2, j2), weight_L(params, u, VertexState(i1, j1, i2, j2))))
    return out


def weight_L_fused(
    params: ModelParams, spin: FusedSpin, u: Rationalish, state: VertexState
) -> mpq:
    """Stochastic weight with horizontal capacity J, rational in qJ.

    The series below is pinned against fusion_collapse_oracle (the
    authoritative construction): stacking J rows with spectral parameters
    u, qu, ..., q^{J-1}u and a q-exchangeable input column collapses to this
    one-vertex kernel. At J = 1 it reduces to weight_L, and at su = s^2 it
    factorizes into the beta-binomial law phi(j2 | i1).
    """
    i1, j1, i2, j2 = state
    if not state.conserves():
        return ZERO
    if spin.J_int is not None and (j1 > spin.J_int or j2 > spin.J_int):
        return ZERO
    q, ssq = params.q, params.s_sq
    t = params.spectral_product(u)
    X = spin.qJ

    den = (
        q_pochhammer(q, q, i2)
        * q_pochhammer(ssq, q, i1)
        * q_pochhammer(q, q, j2)
        * q_pochhammer(t, q, i1 + j1)
    )
    if den == 0:
        raise RegimeError("degenerate parameters in fused weight")
    pref = (
        (-ONE) ** i1
        * ssq**j2
        * (t / ssq) ** i1
        * q ** (i1 * (i1 + 2 * j1 - 1) // 2)
        * q_pochhammer(ssq, q, i2)
        * q_pochhammer(q, q, j1)
        * q_pochhammer(t / ssq, q, j1 - i2)
        / den
    )

    phi = ZERO
    for k in range(i1 + 1):
        term = (
            q**k
            * q_pochhammer(q**-i1, q, k)
            / q_pochhammer(q, q, k)
            * q_pochhammer(q**-i2, q, k)
            * q_pochhammer(X * t, q, k)
            * q_pochhammer(q * ssq / t, q, k)
            * q_pochhammer(ssq * q**k, q, i1 - k)
            * q_pochhammer(q ** (1 + j1 - i2 + k), q, i1 - k)
            * q_pochhammer(X * q ** (1 - i1 - j1 + k), q, i1 - k)
        )
        phi += term
    return pref * phi


def weight_L_fused_row(
    params: ModelParams, spin: FusedSpin, u: Rationalish, i1: int, j1: int
):
    if spin.J_int is None:
        raise ValueError("row enumeration needs an integer spin")
    out = []
    for j2 in range(min(spin.J_int, i1 + j1) + 1):
        i2 = i1 + j1 - j2
        out.append(
            ((i2, j2), weight_L_fused(params, spin, u, VertexState(i1, j1, i2, j2)))
        )
    return out


def _q_exchangeable_inputs(q: mpq, J: int, j_total: int):
    """Binary vectors with j_total ones, weighted by the q-exchangeable law."""
    import itertools

    from .exactcore import q_binomial

    norm = q ** (j_total * (j_total - 1) // 2) * q_binomial(J, j_total, q)
    for h in itertools.product((0, 1), repeat=J):
        if sum(h) != j_total:
            continue
        yield h, q ** sum(r * hr for r, hr in enumerate(h)) / norm


def fusion_collapse_oracle(
    params: ModelParams,
    J: int,
    u: Rationalish,
    i1: int,
    j1_total: int,
    i2: int,
    j2_total: int,
) -> mpq:
    """Probability of output (i2, j2_total) from a J-high column of stochastic
    vertices with spectral parameters u, qu, ..., q^{J-1}u (bottom to top),
    fed i1 vertical arrows and a q-exchangeable horizontal input with
    j1_total arrows in total.

    Independent of weight_L_fused by construction; used to validate it.
    """
    J = int(J)
    if J < 1:
        raise ValueError("J must be a positive integer")
    if not (0 <= j1_total <= J and 0 <= j2_total <= J):
        return ZERO
    q = params.q
    t = params.spectral_product(u)
    prod_params = ModelParams(q=q, s_sq=params.s_sq, s=None)
    total = ZERO
    for h, p_in in _q_exchangeable_inputs(q, J, j1_total):
        # distribution over (vertical value, right-exits so far)
        dist = {(i1, 0): p_in}
        for r, hr in enumerate(h):
            t_r = q**r * t
            new: dict = {}
            for (m, outs), p in dist.items():
                for (m2, j2), w in weight_L_row(prod_params, t_r, m, hr):
                    key = (m2, outs + j2)
                    new[key] = new.get(key, ZERO) + p * w
            dist = new
        total += dist.get((i2, j2_total), ZERO)
    return total


def phi_beta_binomial(
    q: Rationalish,
    mu: Rationalish,
    nu: Rationalish,
    j: int,
    m,
) -> mpq:
    """q-deformed beta-binomial weight phi(j | m); m may be the string "inf".

    The leading mu^j (nu/mu; q)_j is evaluated as prod_k (mu - nu q^k), which
    stays exact at mu = 0. The m = inf case is supported exactly when
    mu = q^J nu for an integer J >= 0, where the infinite quotient collapses
    to 1/(nu; q)_J.
    """
    q = as_exact(q)
    mu = as_exact(mu)
    nu = as_exact(nu)
    j = int(j)
    if j < 0:
        return ZERO
    lead = ONE
    for k in range(j):
        lead *= mu - nu * q**k
    if m == "inf" or m is None:
        J = _as_q_power(mu, nu, q)
        if J is None:
            raise ValueError(
                "phi at m = inf needs mu = q^J nu with integer J >= 0"
            )
        return lead / q_pochhammer(q, q, j) / q_pochhammer(nu, q, J)
    m = int(m)
    if not 0 <= j <= m:
        return ZERO
    den = q_pochhammer(nu, q, m)
    if den == 0:
        raise RegimeError("degenerate parameters: (nu; q)_m = 0")
    return (
        lead
        * q_pochhammer(mu, q, m - j)
        / den
        * q_pochhammer(q, q, m)
        / (q_pochhammer(q, q, j) * q_pochhammer(q, q, m - j))
    )


def _as_q_power(mu: mpq, nu: mpq, q: mpq, bound: int = 512) -> Optional[int]:
    """Return J >= 0 with mu = q^J nu, if one exists (None otherwise)."""
    if nu == 0:
        return 0 if mu == 0 else None
    ratio = mu / nu
    acc = ONE
    for J in range(bound + 1):
        if acc == ratio:
            return J
        acc *= q
    return None


def phi_nonneg_region(q: Rationalish, mu: Rationalish, nu: Rationalish, m) -> bool:
    """Sufficient nonnegativity families for phi; m is an integer or "inf"."""
    q = as_exact(q)
    mu = as_exact(mu)
    nu = as_exact(nu)
    finite = not (m == "inf" or m is None)
    if 0 < q < 1 and 0 <= mu <= 1 and nu <= mu:
        return True
    if 0 < q < 1 and nu <= 0 and _as_q_power(mu, nu, q) is not None:
        return True
    if finite and q > 1 and nu <= 0 and _as_q_power(mu, nu, ONE / q) is not None:
        return True
    if finite and q > 0:
        mt = _as_signed_q_power(mu, q)
        nt = _as_signed_q_power(nu, q)
        if mt is not None and nt is not None:
            if mt >= 0 and nt >= 0 and nt >= mt:
                return True
            if mt <= 0 and nt <= 0 and nt <= -int(m) and nt <= mt:
                return True
    return False


def _as_signed_q_power(val: mpq, q: mpq, bound: int = 64) -> Optional[int]:
    acc = ONE
    for e in range(bound + 1):
        if acc == val:
            return e
        acc *= q
    acc = ONE
    for e in range(1, bound + 1):
        acc /= q
        if acc == val:
            return -e
    return None


def six_vertex_weights(q: Rationalish, t: Rationalish) -> dict:
    """The six stochastic weights in the spin-1/2 specialization s^2 = 1/q,
    keyed by (i1, j1, i2, j2), exact in (q, t) with t = su."""
    q = as_exact(q)
    t = as_exact(t)
    if t == 1:
        raise RegimeError("degenerate parameters: su = 1")
    params = ModelParams.from_q_ssq(q, ONE / q)
    states = [
        (0, 0, 0, 0),
        (1, 0, 1, 0),
        (1, 0, 0, 1),
        (0, 1, 0, 1),
        (0, 1, 1, 0),
        (1, 1, 1, 1),
    ]
    return {st: weight_L(params, t, VertexState(*st)) for st in states}


def _two_vertex_matrix(params: ModelParams, u1: mpq, u2: mpq, m: int, n: int, swap: bool):
    """4x4 table over (k1,k2) -> (k1',k2') for the two-vertex composite with
    vertical states m (first vertex) and n (second); swap exchanges the roles
    of the horizontal lines."""
    order = [(0, 0), (0, 1), (1, 0), (1, 1)]
    mat = []
    for k1, k2 in order:
        row = []
        for k1p, k2p in order:
            a1, b1, a2, b2 = (k2, k1, k2p, k1p) if swap else (k1, k2, k1p, k2p)
            l = m + a1 - a2
            if l < 0 or l + b1 != n + b2:
                row.append(ZERO)
                continue
            row.append(
                weight_w(params, u1, VertexState(m, a1, l, a2))
                * weight_w(params, u2, VertexState(l, b1, n, b2))
            )
        mat.append(row)
    return mat


def _mat_mul(A, B):
    return [
        [sum((A[i][k] * B[k][j] for k in range(4)), ZERO) for j in range(4)]
        for i in range(4)
    ]


def yang_baxter_check(
    params: ModelParams, u1: Rationalish, u2: Rationalish, m_max: int, n_max: int
) -> bool:
    """Exact check that the horizontal-line crossing matrix conjugates the
    two-vertex composites into each other for all vertical states up to the
    given bounds."""
    q = params.q
    u1 = as_exact(u1)
    u2 = as_exact(u2)
    if u1 == q * u2 or u2 == q * u1:
        raise RegimeError("crossing matrix is singular: u1 = q u2 or u2 = q u1")
    X = [
        [u1 - q * u2, ZERO, ZERO, ZERO],
        [ZERO, q * (u1 - u2), (ONE - q) * u1, ZERO],
        [ZERO, (ONE - q) * u2, u1 - u2, ZERO],
        [ZERO, ZERO, ZERO, u1 - q * u2],
    ]
    for m in range(m_max + 1):
        for n in range(n_max + 1):
            M = _two_vertex_matrix(params, u1, u2, m, n, swap=False)
            Mt = _two_vertex_matrix(params, u2, u1, m, n, swap=True)
            if _mat_mul(Mt, X) != _mat_mul(X, M):
                return False
    return True
